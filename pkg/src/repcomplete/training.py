"""Two-stage training: the LSTM language model, then repetition heads on top
of the frozen LM.  Both stages use plain per-function SGD with clamped
gradients and stop on a validation plateau.
"""

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import numeric as nx
from .corpus import context_window
from .errors import ConfigError, DataError, NumericError
from .models import (
    HEAD_MODES,
    AttenPtrHead,
    LanguageModel,
    RepHeadSet,
    atten_ptr_losses,
    rep_losses,
    route_head,
)
from .numeric import clip_gradients, make_rng
from .syntax.filters import NodeClass

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    context_len: int = 25
    patience: int = 10
    seed: int = 0
    learning_rate: float = 0.1
    hidden: int = 128
    embedding: int = 128
    clip: float = 1e6
    heads: str = "single"
    head_kinds: tuple = ()
    unk_count: int = 1000
    max_epochs: int = 200

    def __post_init__(self):
        object.__setattr__(self, "head_kinds", tuple(self.head_kinds))
        for name in ("context_len", "patience", "hidden", "embedding", "max_epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.unk_count < 0:
            raise ConfigError("unk_count must be >= 0")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ConfigError("learning_rate must be a positive finite number")
        if not self.clip > 0:
            raise ConfigError("clip must be positive")
        if self.heads not in HEAD_MODES:
            raise ConfigError(f"heads must be one of {', '.join(HEAD_MODES)}")
        # validates kind names and mode/kinds consistency
        RepHeadSet(None, self.heads, self.head_kinds)

    def to_json(self):
        d = asdict(self)
        d["head_kinds"] = list(self.head_kinds)
        return d

    def digest(self):
        return hashlib.sha256(nx.canonical_json(self.to_json()).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Early stopping
# ---------------------------------------------------------------------------

class EarlyStopping:
    """Stop once the metric has failed to beat its running maximum for
    ``patience`` consecutive epochs."""

    def __init__(self, patience):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best = -math.inf
        self.best_epoch = 0
        self.epoch = 0
        self.stale = 0

    def update(self, metric):
        """Record one epoch's metric; returns True if it is a new best."""
        self.epoch += 1
        if metric > self.best:
            self.best, self.best_epoch, self.stale = metric, self.epoch, 0
            return True
        self.stale += 1
        return False

    @property
    def should_stop(self):
        return self.stale >= self.patience


def early_stopping_trace(metrics, patience, max_epochs=None):
    """Replay a scripted metric sequence: ``(epochs_run, best_epoch)``.

    Epochs are 1-based.  If the sequence ends first, every epoch is run.
    """
    stopper = EarlyStopping(patience)
    for m in metrics[:max_epochs]:
        stopper.update(m)
        if stopper.should_stop:
            break
    return stopper.epoch, stopper.best_epoch


@dataclass
class TrainResult:
    store: object
    best_epoch: int
    best_metric: float
    log: list = field(default_factory=list)

    def log_lines(self):
        return "".join(json.dumps(row, sort_keys=True) + "\n" for row in self.log)


def _fit(store, epoch_pass, validate, config, stage):
    """Shared epoch loop: train, validate, keep the best snapshot.

    ``validate`` returns ``(metric, loss)``.  Stopping depends on the metric
    alone; among epochs tied at the best metric the lowest validation loss
    wins the checkpoint, so a saturated metric still keeps training useful.
    """
    stopper = EarlyStopping(config.patience)
    best = store.snapshot()
    chosen_epoch, chosen_loss = 0, math.inf
    rows = []
    for epoch in range(1, config.max_epochs + 1):
        train_loss = epoch_pass(epoch)
        metric, val_loss = validate()
        metric, val_loss = float(metric), float(val_loss)
        if stopper.update(metric) or (metric == stopper.best and val_loss < chosen_loss):
            best, chosen_epoch, chosen_loss = store.snapshot(), epoch, val_loss
        rows.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "val_metric": metric,
            "val_loss": val_loss,
            "best_so_far": stopper.best,
        })
        log.info("%s epoch %d loss %.5f val %.4f best %.4f", stage, epoch, train_loss, metric, stopper.best)
        if stopper.should_stop:
            break
    store.restore(best)
    return TrainResult(store, chosen_epoch, stopper.best, rows)


def _sgd_update(store, loss, config, where):
    if not np.isfinite(loss.value):
        raise NumericError(f"non-finite loss {where}")
    store.zero_grad()
    loss.backward()
    clip_gradients(store, -config.clip, config.clip)
    store.sgd_step(config.learning_rate)
    return float(loss.value)


def _epoch_order(n, seed, stream, epoch):
    return make_rng(seed * 1000003 + epoch, stream).permutation(n)


# ---------------------------------------------------------------------------
# Language model stage
# ---------------------------------------------------------------------------

def lm_validation(lm, vocab, functions):
    """``(top-1 over content tokens, mean next-token loss)``; UNK never counts as a hit."""
    hits = total = 0
    losses = []
    for f in functions:
        ids = vocab.encode_sequence(f.texts)
        if len(ids) < 2:
            continue
        logits = lm.logits(lm.states(ids))
        losses.append(-nx.log_softmax(logits[:-1])[np.arange(len(ids) - 1), ids[1:]].mean())
        for p, event in enumerate(f.events):
            if not event.is_content or p == 0:
                continue
            total += 1
            # argmax ties resolve by token text, as in full rankings
            row = logits[p - 1]
            best = np.flatnonzero(row == row.max())
            guess = best[np.argmin(vocab.lex_rank[best])]
            hits += guess != vocab.unk_id and vocab.tokens[guess] == event.text
    return (hits / total if total else 0.0), (float(np.mean(losses)) if losses else 0.0)


def train_lm(split, vocab, config):
    """Train the language model; returns the best-validation checkpoint."""
    if not split.train or not split.validation:
        raise DataError("train_lm needs nonempty train and validation splits")
    lm = LanguageModel.create(len(vocab), config.embedding, config.hidden, config.seed)
    encoded = [(f.id, vocab.encode_sequence(f.texts)) for f in split.train if len(f) >= 2]

    def epoch_pass(epoch):
        losses = []
        for i in _epoch_order(len(encoded), config.seed, 4, epoch):
            fid, ids = encoded[i]
            losses.append(_sgd_update(lm.store, lm.loss(ids), config, f"in {fid} (epoch {epoch})"))
        return float(np.mean(losses)) if losses else 0.0

    result = _fit(lm.store, epoch_pass, lambda: lm_validation(lm, vocab, split.validation), config, "lm")
    return lm, result


# ---------------------------------------------------------------------------
# Repetition-head stage
# ---------------------------------------------------------------------------

@dataclass
class PredictionPoint:
    position: int
    context: list  # context positions after any routing restriction
    kind: str
    target: np.ndarray = None  # normalized multi-hot over context, None when not repeated

    @property
    def repeated(self):
        return self.target is not None


def prediction_points(events, m, variables_only=False):
    """Cared content positions paired with their (restricted) context."""
    points = []
    for p, event in enumerate(events):
        if event.node_class is not NodeClass.CARED or p == 0:
            continue
        ctx = list(context_window(events, p, m).positions)
        if variables_only:
            ctx = [k for k in ctx if events[k].is_variable]
        if not ctx:
            continue
        match = np.array([events[k].text == event.text for k in ctx], dtype=float)
        target = match / match.sum() if match.any() else None
        points.append(PredictionPoint(p, ctx, event.parent_kind, target))
    return points


def _head_batches(lm, vocab, functions, config, variables_only):
    batches = []
    for f in functions:
        points = prediction_points(f.events, config.context_len, variables_only)
        if points:
            batches.append((f.id, lm.states(vocab.encode_sequence(f.texts)), points))
    return batches


def _point_losses(loss_fn, H, pt):
    states, h_next = nx.constant(H[pt.context]), nx.constant(H[pt.position - 1])
    return [t for t in loss_fn(states, h_next, pt) if t is not None]


def _head_loss(loss_fn, batches):
    """Mean per-point loss over precomputed batches, no parameter update."""
    total = count = 0
    for _, H, points in batches:
        for pt in points:
            total += sum(t.item() for t in _point_losses(loss_fn, H, pt))
            count += 1
    return total / count if count else 0.0


def _train_head(store, loss_fn, lm, vocab, split, config, metric, variables_only, stage):
    batches = _head_batches(lm, vocab, split.train, config, variables_only)
    if not batches:
        raise DataError("no cared prediction points with context in the training split")
    val_batches = _head_batches(lm, vocab, split.validation, config, variables_only)

    def epoch_pass(epoch):
        losses = []
        for i in _epoch_order(len(batches), config.seed, 5, epoch):
            fid, H, points = batches[i]
            terms = [t for pt in points for t in _point_losses(loss_fn, H, pt)]
            loss = nx.scale(nx.total(terms), 1.0 / len(points))
            losses.append(_sgd_update(store, loss, config, f"in {fid} (epoch {epoch})"))
        return float(np.mean(losses))

    return _fit(store, epoch_pass, lambda: (metric(), _head_loss(loss_fn, val_batches)), config, stage)


def train_rep(split, lm, vocab, config):
    """Fit REP heads on hidden states of the frozen language model."""
    from .evaluation import Predictor, cared_top1

    heads = RepHeadSet.create(lm.hidden, config.heads, config.head_kinds)

    def loss_fn(states, h_next, pt):
        return rep_losses(states, h_next, route_head(pt.kind, heads), pt.target, pt.repeated)

    predictor = Predictor(lm, vocab, "rep", config.context_len, heads=heads)
    result = _train_head(
        heads.store, loss_fn, lm, vocab, split, config,
        lambda: cared_top1(predictor, split.validation),
        heads.mode == "variables-only", "rep",
    )
    return heads, result


def train_ptr(split, lm, vocab, config):
    """Fit the attention-pointer comparator on the frozen language model."""
    from .evaluation import Predictor, cared_top1

    head = AttenPtrHead.create(lm.hidden, seed=config.seed)

    def loss_fn(states, h_next, pt):
        return atten_ptr_losses(states, h_next, head, pt.target, pt.repeated)

    predictor = Predictor(lm, vocab, "atten-ptr", config.context_len, ptr=head)
    result = _train_head(
        head.store, loss_fn, lm, vocab, split, config,
        lambda: cared_top1(predictor, split.validation), False, "atten-ptr",
    )
    return head, result
