"""End-to-end finite-difference check on a tiny token sequence.

The loss runs embedding lookup, the LSTM, the next-token loss, both REP
losses and the attention-pointer losses, so one report covers every
parameter the trainers update.
"""

import numpy as np

from . import numeric as nx
from .models import LstmState, RepParams, atten_ptr_losses, lstm_sequence, lstm_step, rep_losses
from .numeric import ParamStore, grad_check, make_rng


class _ToyPtr:
    def __init__(self, store):
        self.store = store

    def params(self):
        s = self.store
        return s["ptr/A"], s["ptr/B"], s["ptr/v"], s["ptr/wg"], s["ptr/bg"]


def toy_params(vocab=5, embedding=4, hidden=3, attention=3, seed=0, scale=0.5):
    rng = make_rng(seed, stream=9)
    shapes = {
        "lm/E": (vocab, embedding),
        "lm/Wx": (embedding, 4 * hidden),
        "lm/Wh": (hidden, 4 * hidden),
        "lm/b": (4 * hidden,),
        "lm/P": (hidden, vocab),
        "lm/c": (vocab,),
        "rep/W": (hidden, hidden),
        "rep/V1": (hidden, hidden),
        "rep/V2": (hidden, hidden),
        "ptr/A": (attention, hidden),
        "ptr/B": (attention, hidden),
        "ptr/v": (attention,),
        "ptr/wg": (hidden,),
        "ptr/bg": (1,),
    }
    store = ParamStore()
    for name, shape in shapes.items():
        store.add(name, rng.uniform(-scale, scale, size=shape))
    return store


def toy_loss(store, ids=(1, 3, 1), composed=False, repeated=True):
    """Summed losses for predicting ``ids[2]`` from a two-entry context."""
    s = store
    ids = np.asarray(ids)
    x = nx.take(s["lm/E"], ids)
    if composed:
        hidden = s["lm/Wh"].shape[0]
        state = LstmState(nx.constant(np.zeros(hidden)), nx.constant(np.zeros(hidden)))
        rows = []
        for t in range(len(ids)):
            state = lstm_step(state, nx.take(x, t), s["lm/Wx"], s["lm/Wh"], s["lm/b"])
            rows.append(state.h)
        H = nx.stack(rows)
    else:
        H = lstm_sequence(x, s["lm/Wx"], s["lm/Wh"], s["lm/b"])
    logits = nx.add(nx.matmul(nx.take(H, np.arange(len(ids) - 1)), s["lm/P"]), s["lm/c"])
    terms = [nx.softmax_cross_entropy(logits, ids[1:])]
    ctx = nx.take(H, np.array([0, 1]))
    h_next = nx.take(H, 1)
    target = np.array([1.0, 0.0])
    rep = RepParams(s["rep/W"], s["rep/V1"], s["rep/V2"])
    for head_losses in (rep_losses(ctx, h_next, rep, target, repeated),
                        atten_ptr_losses(ctx, h_next, _ToyPtr(s), target, repeated)):
        terms.extend(t for t in head_losses if t is not None)
    return nx.total(terms)


def end_to_end_check(tolerance=1e-4, seed=0, composed=False, step=1e-5):
    store = toy_params(seed=seed)
    return grad_check(lambda: toy_loss(store, composed=composed), dict(store.items()), tolerance, step)
