"""Minimal reverse-mode autodiff over float64 numpy arrays."""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

DTYPE = np.float64


def make_rng(seed, stream=0):
    """Portable PCG64 generator; ``stream`` separates independent uses of one seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, value, parents=(), backward=None, requires_grad=None, name=None):
        self.value = np.asarray(value, dtype=DTYPE)
        self.grad = np.zeros_like(self.value)
        self._parents = tuple(parents)
        self._backward = backward
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p in self._parents)
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        return float(self.value)

    def backward(self):
        """Accumulate d(self)/d(leaf) into every reachable ``grad``."""
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = self.grad + np.ones_like(self.value)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.value.shape})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def constant(value):
    return Tensor(value, requires_grad=False)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else constant(x)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _accumulate(t, g):
    if t.requires_grad:
        t.grad += g


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value + b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    out._backward = backward
    return out


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value - b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, -_unbroadcast(g, b.shape))

    out._backward = backward
    return out


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value * b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g * b.value, a.shape))
        _accumulate(b, _unbroadcast(g * a.value, b.shape))

    out._backward = backward
    return out


def scale(a, c):
    out = Tensor(a.value * c, (a,))
    out._backward = lambda g: _accumulate(a, g * c)
    return out


def matmul(a, b):
    """Matrix/vector product for 1-D and 2-D operands."""
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value @ b.value, (a, b))
    av, bv = a.value, b.value

    def backward(g):
        if av.ndim == 2 and bv.ndim == 2:
            da, db = g @ bv.T, av.T @ g
        elif av.ndim == 2:
            da, db = np.outer(g, bv), av.T @ g
        elif bv.ndim == 2:
            da, db = bv @ g, np.outer(av, g)
        else:
            da, db = g * bv, g * av
        _accumulate(a, da)
        _accumulate(b, db)

    out._backward = backward
    return out


def tanh(a):
    y = np.tanh(a.value)
    out = Tensor(y, (a,))
    out._backward = lambda g: _accumulate(a, g * (1.0 - y * y))
    return out


def _sigmoid(x):
    # exp of a non-positive argument only
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(a):
    y = _sigmoid(a.value)
    out = Tensor(y, (a,))
    out._backward = lambda g: _accumulate(a, g * y * (1.0 - y))
    return out


def take(a, index):
    """Gather entries (rows for 2-D) of ``a`` at integer ``index``."""
    index = np.asarray(index, dtype=np.int64)
    out = Tensor(a.value[index], (a,))

    def backward(g):
        if a.requires_grad:
            np.add.at(a.grad, index, g)

    out._backward = backward
    return out


def slice_(a, start, stop):
    """``a[..., start:stop]`` along the last axis."""
    out = Tensor(a.value[..., start:stop], (a,))

    def backward(g):
        if a.requires_grad:
            a.grad[..., start:stop] += g

    out._backward = backward
    return out


def stack(tensors):
    tensors = [_as_tensor(t) for t in tensors]
    out = Tensor(np.stack([t.value for t in tensors]), tensors)

    def backward(g):
        for i, t in enumerate(tensors):
            _accumulate(t, g[i])

    out._backward = backward
    return out


def sum_(a):
    out = Tensor(a.value.sum(), (a,))
    out._backward = lambda g: _accumulate(a, np.broadcast_to(g, a.shape).copy())
    return out


def total(tensors):
    """Sum of scalar tensors as a single node."""
    tensors = list(tensors)
    out = Tensor(sum(t.value for t in tensors), tensors)

    def backward(g):
        for t in tensors:
            _accumulate(t, g)

    out._backward = backward
    return out


def stable_softmax(logits):
    """Softmax along the last axis using max-shifted exponentials."""
    x = np.asarray(logits, dtype=DTYPE)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    x = np.asarray(logits, dtype=DTYPE)
    shifted = x - x.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_cross_entropy(logits, target):
    """Summed cross-entropy ``-sum(target * log_softmax(logits))``.

    ``target`` is either a probability array shaped like ``logits`` (rows
    for 2-D logits) or an integer class array with one entry per row.
    Gradient w.r.t. logits is ``softmax(logits) - target``.
    """
    logits = _as_tensor(logits)
    x = logits.value
    target = np.asarray(target)
    if np.issubdtype(target.dtype, np.integer):
        dense = np.zeros_like(x)
        if x.ndim == 1:
            dense[int(target)] = 1.0
        else:
            dense[np.arange(x.shape[0]), target] = 1.0
        target = dense
    else:
        target = target.astype(DTYPE)
        if target.shape != x.shape:
            raise ValueError(f"target shape {target.shape} != logits shape {x.shape}")
        sums = target.sum(axis=-1)
        assert np.all(target >= 0) and np.allclose(sums, 1.0, atol=1e-9), "target rows must be probability vectors"
    logp = log_softmax(x)
    out = Tensor(-(target * logp).sum(), (logits,))

    def backward(g):
        _accumulate(logits, g * (np.exp(logp) - target))

    out._backward = backward
    return out


@dataclass
class GradCheckReport:
    errors: dict  # parameter name -> max relative error
    tolerance: float

    @property
    def max_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self):
        return self.max_error < self.tolerance

    def __str__(self):
        lines = [f"{name}: {err:.3e}" for name, err in self.errors.items()]
        lines.append(f"max relative error {self.max_error:.3e} ({'PASS' if self.passed else 'FAIL'} at {self.tolerance:g})")
        return "\n".join(lines)


def relative_error(analytic, numeric, floor=1e-4):
    """Elementwise ``|a - n| / max(|a| + |n|, floor)``."""
    a, n = np.asarray(analytic), np.asarray(numeric)
    return np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)


def grad_check(closure, params, tolerance=1e-4, step=1e-5):
    """Compare backprop gradients with central differences.

    ``closure()`` must rebuild and return a scalar loss Tensor from
    ``params`` (a name -> Tensor mapping) on every call.
    """
    params = dict(params)
    for p in params.values():
        p.grad[...] = 0.0
    loss = closure()
    if not np.isfinite(loss.value):
        raise NumericError("grad_check: non-finite loss")
    loss.backward()
    errors = {}
    for name, p in params.items():
        analytic = p.grad.copy()
        numeric = np.zeros_like(p.value)
        flat, nflat = p.value.reshape(-1), numeric.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up = closure().item()
            flat[j] = orig - step
            down = closure().item()
            flat[j] = orig
            nflat[j] = (up - down) / (2 * step)
        errors[name] = float(relative_error(analytic, numeric).max()) if p.value.size else 0.0
    return GradCheckReport(errors, tolerance)


class ParamStore:
    """Named parameter tensors with SGD, clipping and JSON checkpoints."""

    def __init__(self):
        self.params = {}

    def add(self, name, value):
        if name in self.params:
            raise KeyError(f"duplicate parameter {name!r}")
        t = Tensor(value, requires_grad=True, name=name)
        self.params[name] = t
        return t

    def __getitem__(self, name):
        return self.params[name]

    def __contains__(self, name):
        return name in self.params

    def __iter__(self):
        return iter(self.params)

    def items(self):
        return self.params.items()

    def zero_grad(self):
        for p in self.params.values():
            p.grad[...] = 0.0

    def sgd_step(self, learning_rate):
        for p in self.params.values():
            p.value -= learning_rate * p.grad

    def snapshot(self):
        return {name: p.value.copy() for name, p in self.params.items()}

    def restore(self, snapshot):
        for name, value in snapshot.items():
            self.params[name].value[...] = value

    def to_json(self):
        return {name: {"shape": list(p.value.shape), "values": p.value.reshape(-1).tolist()}
                for name, p in self.params.items()}

    @classmethod
    def from_json(cls, obj):
        store = cls()
        for name, entry in obj.items():
            store.add(name, np.asarray(entry["values"], dtype=DTYPE).reshape(entry["shape"]))
        return store

    def digest(self):
        h = hashlib.sha256()
        for name, p in self.params.items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(p.value).tobytes())
        return h.hexdigest()


def clip_gradients(store, lo=-1e6, hi=1e6):
    """Clamp every gradient component into ``[lo, hi]``."""
    if not lo < hi:
        raise ValueError("clip bounds need lo < hi")
    for p in store.params.values():
        np.clip(p.grad, lo, hi, out=p.grad)
    return store


def uniform(rng, shape, lo, hi):
    return rng.uniform(lo, hi, size=shape)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
