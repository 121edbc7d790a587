"""LSTM language model, the REP repetition head, the attention-pointer
comparator, and the mixture that turns them into one ranked candidate list.
"""

from dataclasses import dataclass, field

import numpy as np

from . import numeric as nx
from .errors import ConfigError
from .numeric import ParamStore, Tensor, make_rng, stable_softmax, uniform
from .syntax.nodes import NODE_KINDS

HEAD_MODES = ("single", "per-kind", "variables-only")
DEFAULT_GROUP = "default"


# ---------------------------------------------------------------------------
# LSTM language model
# ---------------------------------------------------------------------------

@dataclass
class LstmState:
    cell: object
    h: object


def lstm_step(prev, x, Wx, Wh, b):
    """One LSTM step from elementary tape ops (gate order i, f, g, o)."""
    hidden = Wh.shape[0]
    z = nx.add(nx.add(nx.matmul(x, Wx), nx.matmul(prev.h, Wh)), b)
    i = nx.sigmoid(nx.slice_(z, 0, hidden))
    f = nx.sigmoid(nx.slice_(z, hidden, 2 * hidden))
    g = nx.tanh(nx.slice_(z, 2 * hidden, 3 * hidden))
    o = nx.sigmoid(nx.slice_(z, 3 * hidden, 4 * hidden))
    cell = nx.add(nx.mul(f, prev.cell), nx.mul(i, g))
    h = nx.mul(o, nx.tanh(cell))
    return LstmState(cell, h)


def _lstm_forward(X, Wx, Wh, b):
    T, hidden = X.shape[0], Wh.shape[0]
    H = np.zeros((T, hidden))
    C = np.zeros((T, hidden))
    gates = np.zeros((T, 4 * hidden))
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    XW = X @ Wx + b
    for t in range(T):
        z = XW[t] + h @ Wh
        i = nx._sigmoid(z[:hidden])
        f = nx._sigmoid(z[hidden:2 * hidden])
        g = np.tanh(z[2 * hidden:3 * hidden])
        o = nx._sigmoid(z[3 * hidden:])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :hidden], gates[t, hidden:2 * hidden] = i, f
        gates[t, 2 * hidden:3 * hidden], gates[t, 3 * hidden:] = g, o
        H[t], C[t] = h, c
    return H, C, gates


def lstm_states(X, Wx, Wh, b):
    """Hidden states for an input matrix, no tape (inference)."""
    return _lstm_forward(X, Wx, Wh, b)[0]


def lstm_sequence(X, Wx, Wh, b):
    """Run the LSTM over all rows of ``X`` from a zero state.

    Single tape node with a hand-written backpropagation-through-time
    backward; equivalent to chaining ``lstm_step``.
    """
    H, C, gates = _lstm_forward(X.value, Wx.value, Wh.value, b.value)
    out = Tensor(H, (X, Wx, Wh, b))
    hidden = Wh.shape[0]

    def backward(dH):
        T = H.shape[0]
        Wxv, Whv = Wx.value, Wh.value
        dZ = np.zeros((T, 4 * hidden))
        dh_next = np.zeros(hidden)
        dc_next = np.zeros(hidden)
        for t in range(T - 1, -1, -1):
            i, f = gates[t, :hidden], gates[t, hidden:2 * hidden]
            g, o = gates[t, 2 * hidden:3 * hidden], gates[t, 3 * hidden:]
            tc = np.tanh(C[t])
            c_prev = C[t - 1] if t > 0 else np.zeros(hidden)
            dh = dH[t] + dh_next
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dz = dZ[t]
            dz[:hidden] = dc * g * i * (1.0 - i)
            dz[hidden:2 * hidden] = dc * c_prev * f * (1.0 - f)
            dz[2 * hidden:3 * hidden] = dc * i * (1.0 - g * g)
            dz[3 * hidden:] = dh * tc * o * (1.0 - o)
            dc_next = dc * f
            dh_next = Whv @ dz
        H_prev = np.vstack([np.zeros((1, hidden)), H[:-1]])
        nx._accumulate(X, dZ @ Wxv.T)
        nx._accumulate(Wx, X.value.T @ dZ)
        nx._accumulate(Wh, H_prev.T @ dZ)
        nx._accumulate(b, dZ.sum(axis=0))

    out._backward = backward
    return out


class LanguageModel:
    """Token-level LSTM language model over a closed vocabulary.

    Parameters: embeddings ``E`` (uniform in [-1, 1]), LSTM ``Wx``/``Wh``/``b``
    (zero, forget-gate bias 1), output projection ``P`` (uniform in
    [-0.1, 0.1]) and bias ``c`` (zero).
    """

    def __init__(self, store):
        self.store = store

    @classmethod
    def create(cls, vocab_size, embedding=128, hidden=128, seed=0):
        rng = make_rng(seed, stream=2)
        store = ParamStore()
        store.add("lm/E", uniform(rng, (vocab_size, embedding), -1.0, 1.0))
        store.add("lm/Wx", np.zeros((embedding, 4 * hidden)))
        store.add("lm/Wh", np.zeros((hidden, 4 * hidden)))
        bias = np.zeros(4 * hidden)
        bias[hidden:2 * hidden] = 1.0
        store.add("lm/b", bias)
        store.add("lm/P", uniform(rng, (hidden, vocab_size), -0.1, 0.1))
        store.add("lm/c", np.zeros(vocab_size))
        return cls(store)

    @property
    def hidden(self):
        return self.store["lm/Wh"].shape[0]

    @property
    def vocab_size(self):
        return self.store["lm/E"].shape[0]

    def _p(self):
        s = self.store
        return s["lm/E"], s["lm/Wx"], s["lm/Wh"], s["lm/b"], s["lm/P"], s["lm/c"]

    def states(self, ids):
        """Hidden state after consuming each token of ``ids`` (numpy, T x hidden)."""
        E, Wx, Wh, b, _, _ = self._p()
        return lstm_states(E.value[np.asarray(ids)], Wx.value, Wh.value, b.value)

    def states_tensor(self, ids):
        E, Wx, Wh, b, _, _ = self._p()
        return lstm_sequence(nx.take(E, ids), Wx, Wh, b)

    def logits(self, H):
        _, _, _, _, P, c = self._p()
        return np.asarray(H) @ P.value + c.value

    def next_distribution(self, h):
        """Distribution over the vocabulary for the token after state ``h``."""
        return stable_softmax(self.logits(h))

    def loss(self, ids):
        """Mean next-token cross-entropy over a sequence."""
        ids = np.asarray(ids)
        if len(ids) < 2:
            raise ValueError("need at least two tokens")
        _, _, _, _, P, c = self._p()
        H = self.states_tensor(ids)
        rows = nx.take(H, np.arange(len(ids) - 1))
        logits = nx.add(nx.matmul(rows, P), c)
        return nx.scale(nx.softmax_cross_entropy(logits, ids[1:]), 1.0 / (len(ids) - 1))


# ---------------------------------------------------------------------------
# Repetition heads
# ---------------------------------------------------------------------------

@dataclass
class ContextStates:
    """Hidden states of the cared context tokens plus the prediction state."""

    states: np.ndarray  # (k, hidden), oldest first
    h_next: np.ndarray  # (hidden,)
    token_refs: list = field(default_factory=list)  # (raw text, position) per entry

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float).reshape(-1, np.asarray(self.h_next).shape[-1])
        if self.token_refs and len(self.token_refs) != len(self.states):
            raise ValueError("token_refs must align with states")

    def __len__(self):
        return len(self.states)

    @property
    def texts(self):
        return [text for text, _ in self.token_refs]


@dataclass
class RepParams:
    W: object
    V1: object
    V2: object


def rep_scores(states, h_next, W):
    """Bilinear pointer scores h_k^T W h_next for every context entry."""
    return np.asarray(states) @ (np.asarray(W) @ np.asarray(h_next))


def rep_pointer_probs(ctx, params):
    """P(k, next): softmax of the bilinear scores over context entries."""
    if len(ctx) == 0:
        raise ValueError("empty context: the repetition head does not apply")
    return stable_softmax(rep_scores(ctx.states, ctx.h_next, _value(params.W)))


def rep_argmax(pointer_probs):
    """Index of the most probable context entry (lowest index on ties)."""
    probs = np.asarray(pointer_probs)
    if probs.size == 0:
        raise ValueError("empty pointer distribution")
    return int(np.argmax(probs))


def rep_decision(ctx, mk, params):
    """P(next token repeats the entry ``mk``), a two-way softmax of bilinear forms."""
    h_mk, h_next = ctx.states[mk], ctx.h_next
    a1 = h_mk @ _value(params.V1) @ h_next
    a2 = h_mk @ _value(params.V2) @ h_next
    return float(stable_softmax(np.array([a1, a2]))[0])


def _value(x):
    return x.value if isinstance(x, Tensor) else np.asarray(x)


def rep_losses(states, h_next, params, target, repeated):
    """Tape version of the REP head for one prediction point.

    ``states``/``h_next`` are Tensors (constants when the LM is frozen).
    Returns ``(pointer_loss or None, decision_loss)``: cross-entropy of the
    pointer distribution against ``target`` (a normalized multi-hot over
    context entries, ignored when nothing matches) and two-way
    cross-entropy of the repetition decision against ``repeated``.
    """
    scores = nx.matmul(states, nx.matmul(params.W, h_next))
    pointer_loss = nx.softmax_cross_entropy(scores, target) if repeated else None
    mk = rep_argmax(scores.value)
    h_mk = nx.take(states, mk)
    a1 = nx.matmul(h_mk, nx.matmul(params.V1, h_next))
    a2 = nx.matmul(h_mk, nx.matmul(params.V2, h_next))
    decision_loss = nx.softmax_cross_entropy(nx.stack([a1, a2]), np.array([1.0, 0.0]) if repeated else np.array([0.0, 1.0]))
    return pointer_loss, decision_loss


class RepHeadSet:
    """REP parameter groups plus the routing policy.

    ``mode``: ``single`` (one head), ``per-kind`` (one head per listed
    parent kind and a default head for the rest) or ``variables-only``
    (one head whose context keeps only variable entries).
    """

    def __init__(self, store, mode="single", kinds=()):
        if mode not in HEAD_MODES:
            raise ConfigError(f"unknown head mode {mode!r}; expected one of {HEAD_MODES}")
        unknown = [k for k in kinds if k not in NODE_KINDS]
        if unknown:
            raise ConfigError(f"unknown node kind(s) in head routing: {', '.join(unknown)}")
        if mode != "per-kind" and kinds:
            raise ConfigError("head kinds are only meaningful in per-kind mode")
        self.store = store
        self.mode = mode
        self.kinds = tuple(kinds)

    @classmethod
    def create(cls, hidden, mode="single", kinds=()):
        store = ParamStore()
        heads = cls(store, mode, kinds)
        for group in heads.groups:
            for name in ("W", "V1", "V2"):
                store.add(f"rep/{group}/{name}", np.zeros((hidden, hidden)))
        return heads

    @property
    def groups(self):
        return (DEFAULT_GROUP,) + (self.kinds if self.mode == "per-kind" else ())

    def params(self, group):
        s = self.store
        return RepParams(s[f"rep/{group}/W"], s[f"rep/{group}/V1"], s[f"rep/{group}/V2"])

    def group_of(self, kind):
        if self.mode == "per-kind" and kind in self.kinds:
            return kind
        return DEFAULT_GROUP

    def config(self):
        return {"mode": self.mode, "kinds": list(self.kinds)}


def route_head(kind, heads):
    """Parameters of the head responsible for a cared token of ``kind``."""
    return heads.params(heads.group_of(kind))


def restrict_context(entries, heads):
    """Apply the routing mode's context restriction to ``(position, event)`` entries."""
    if heads.mode == "variables-only":
        return [(k, e) for k, e in entries if e.is_variable]
    return list(entries)


# ---------------------------------------------------------------------------
# Attention-pointer comparator
# ---------------------------------------------------------------------------

class AttenPtrHead:
    """Additive-attention pointer with a scalar mixture gate.

    u_k = v . tanh(A h_k + B h_next), pointer = softmax(u),
    gate = sigmoid(w_g . h_next + b_g).
    """

    def __init__(self, store):
        self.store = store

    @classmethod
    def create(cls, hidden, attention=None, seed=0):
        attention = attention or hidden
        rng = make_rng(seed, stream=3)
        store = ParamStore()
        store.add("ptr/A", uniform(rng, (attention, hidden), -0.1, 0.1))
        store.add("ptr/B", uniform(rng, (attention, hidden), -0.1, 0.1))
        store.add("ptr/v", np.zeros(attention))
        store.add("ptr/wg", np.zeros(hidden))
        store.add("ptr/bg", np.zeros(1))
        return cls(store)

    def params(self):
        s = self.store
        return s["ptr/A"], s["ptr/B"], s["ptr/v"], s["ptr/wg"], s["ptr/bg"]


def atten_ptr_forward(ctx, head):
    """Pointer distribution and gate for a nonempty context (numpy)."""
    A, B, v, wg, bg = (p.value for p in head.params())
    u = np.tanh(ctx.states @ A.T + B @ ctx.h_next) @ v
    gate = float(nx._sigmoid(wg @ ctx.h_next + bg[0]))
    return stable_softmax(u), gate


def atten_ptr_losses(states, h_next, head, target, repeated):
    """Tape version of the comparator for one prediction point."""
    A, B, v, wg, bg = head.params()
    pre = nx.add(nx.matmul(states, _transpose(A)), nx.matmul(B, h_next))
    u = nx.matmul(nx.tanh(pre), v)
    pointer_loss = nx.softmax_cross_entropy(u, target) if repeated else None
    z = nx.add(nx.matmul(wg, h_next), nx.take(bg, 0))
    gate_logits = nx.stack([z, nx.constant(0.0)])
    gate_loss = nx.softmax_cross_entropy(gate_logits, np.array([1.0, 0.0]) if repeated else np.array([0.0, 1.0]))
    return pointer_loss, gate_loss


def _transpose(a):
    out = Tensor(a.value.T, (a,))
    out._backward = lambda g: nx._accumulate(a, g.T)
    return out


# ---------------------------------------------------------------------------
# Mixing
# ---------------------------------------------------------------------------

def _sorted_candidates(mass):
    return sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))


def mix_distributions(lm_dist, vocab_tokens, pointer_probs, p_rep, ctx_texts):
    """Merge the LM distribution with pointer mass into ranked candidates.

    Context entry k contributes ``p_rep * pointer_probs[k]`` to its raw
    text, each vocabulary token ``(1 - p_rep) * lm_dist[i]``; equal strings
    are summed. Sorted by descending probability, then token text.
    """
    lm_dist = np.asarray(lm_dist, dtype=float)
    if len(ctx_texts) == 0:
        return _sorted_candidates(dict(zip(vocab_tokens, lm_dist.tolist())))
    mass = {}
    for tok, p in zip(vocab_tokens, ((1.0 - p_rep) * lm_dist).tolist()):
        mass[tok] = mass.get(tok, 0.0) + p
    for text, p in zip(ctx_texts, np.asarray(pointer_probs, dtype=float).tolist()):
        mass[text] = mass.get(text, 0.0) + p_rep * p
    return _sorted_candidates(mass)


def top_lm_ids(lm_dist, lex_rank, k):
    """Ids of the ``k`` most probable tokens (ties by token text), exact."""
    lm_dist = np.asarray(lm_dist)
    k = min(k, lm_dist.size)
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    threshold = np.partition(lm_dist, lm_dist.size - k)[lm_dist.size - k]
    pool = np.flatnonzero(lm_dist >= threshold)
    order = np.lexsort((lex_rank[pool], -lm_dist[pool]))
    return pool[order[:k]]


def top_candidates(lm_dist, vocab_tokens, lex_rank, pointer_probs, p_rep, ctx_texts, k):
    """The first ``k`` entries of ``mix_distributions`` without ranking the whole vocabulary."""
    if len(ctx_texts) == 0:
        return [(vocab_tokens[i], float(lm_dist[i])) for i in top_lm_ids(lm_dist, lex_rank, k)]
    pointer_mass = {}
    for text, p in zip(ctx_texts, np.asarray(pointer_probs, dtype=float).tolist()):
        pointer_mass[text] = pointer_mass.get(text, 0.0) + p_rep * p
    # any vocab token outside this pool is beaten by at least k pool tokens
    pool = top_lm_ids(lm_dist, lex_rank, k + len(pointer_mass))
    mass = {vocab_tokens[i]: (1.0 - p_rep) * float(lm_dist[i]) for i in pool}
    index_of = {}
    for text, pm in pointer_mass.items():
        if text not in mass:
            mass[text] = (1.0 - p_rep) * _lm_prob(text, vocab_tokens, lm_dist, index_of)
        mass[text] += pm
    return _sorted_candidates(mass)[:k]


def _lm_prob(text, vocab_tokens, lm_dist, cache):
    if not cache:
        cache.update({t: i for i, t in enumerate(vocab_tokens)})
    i = cache.get(text)
    return float(lm_dist[i]) if i is not None else 0.0
