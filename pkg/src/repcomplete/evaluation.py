"""Teacher-forced, stratified top-k evaluation and the side-by-side table."""

import re
from dataclasses import dataclass, field

import numpy as np

from .corpus import context_window
from .errors import ConfigError, DataError
from .models import (
    ContextStates,
    atten_ptr_forward,
    rep_argmax,
    rep_decision,
    rep_pointer_probs,
    route_head,
    top_candidates,
    top_lm_ids,
)
from .numeric import stable_softmax
from .syntax.filters import NodeClass

STRATA = ("all", "cared", "unseen-cared")
TOP_K = (1, 3, 6, 10)
MODELS = ("lstm", "atten-ptr", "rep")
SCOPE_NOTE = "content tokens only; node-type tokens are given and never scored"


@dataclass
class Suggestion:
    candidates: list  # (text, probability), best first
    p_rep: float = None  # gate value when a pointer contributed, else None
    context: list = field(default_factory=list)  # raw texts the pointer saw


class Predictor:
    """Candidate generator for one model kind over a frozen language model."""

    def __init__(self, lm, vocab, model, context_len, heads=None, ptr=None):
        if model not in MODELS:
            raise ConfigError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
        if model == "rep" and heads is None:
            raise ConfigError("the rep model needs trained heads")
        if model == "atten-ptr" and ptr is None:
            raise ConfigError("the atten-ptr model needs a trained pointer")
        self.lm, self.vocab, self.model, self.context_len = lm, vocab, model, context_len
        self.heads, self.ptr = heads, ptr

    def prepare(self, events):
        """Teacher-forced hidden states and LM distributions for one function."""
        H = self.lm.states(self.vocab.encode_sequence([e.text for e in events]))
        return H, stable_softmax(self.lm.logits(H))

    def _context(self, events, p):
        ctx = context_window(events, p, self.context_len).positions
        if self.model == "rep" and self.heads.mode == "variables-only":
            ctx = tuple(k for k in ctx if events[k].is_variable)
        return ctx

    def suggest(self, events, H, probs, p, k):
        """Top-``k`` candidates for the content token at position ``p``."""
        lm_dist = probs[p - 1]
        tokens, lex = self.vocab.tokens, self.vocab.lex_rank
        ctx = self._context(events, p) if self.model != "lstm" and events[p].node_class is NodeClass.CARED else ()
        if not ctx:
            return Suggestion([(tokens[i], float(lm_dist[i])) for i in top_lm_ids(lm_dist, lex, k)])
        cs = ContextStates(H[list(ctx)], H[p - 1], [(events[j].text, j) for j in ctx])
        if self.model == "rep":
            params = route_head(events[p].parent_kind, self.heads)
            pointer = rep_pointer_probs(cs, params)
            p_rep = rep_decision(cs, rep_argmax(pointer), params)
        else:
            pointer, p_rep = atten_ptr_forward(cs, self.ptr)
        cands = top_candidates(lm_dist, tokens, lex, pointer, p_rep, cs.texts, k)
        return Suggestion(cands, p_rep, cs.texts)


@dataclass
class EvalReport:
    model: str
    split: str
    totals: dict  # stratum -> scored tokens
    hits: dict  # stratum -> {k: hits}

    def accuracy(self, stratum, k):
        n = self.totals[stratum]
        return self.hits[stratum][k] / n if n else 0.0

    def to_json(self):
        return {
            "model": self.model,
            "split": self.split,
            "scope": SCOPE_NOTE,
            "strata": {
                s: {
                    "total": self.totals[s],
                    "hits": {str(k): self.hits[s][k] for k in TOP_K},
                    "accuracy": {str(k): self.accuracy(s, k) for k in TOP_K},
                }
                for s in STRATA
            },
        }

    @classmethod
    def from_json(cls, obj):
        strata = obj["strata"]
        return cls(
            obj["model"],
            obj["split"],
            {s: strata[s]["total"] for s in STRATA},
            {s: {k: strata[s]["hits"][str(k)] for k in TOP_K} for s in STRATA},
        )


def _rank_of(candidates, text):
    for i, (cand, _) in enumerate(candidates):
        if cand == text:
            return i
    return None


def evaluate(predictor, functions, train_texts, split="test", strata=STRATA):
    """Score every content token of ``functions`` under teacher forcing.

    A hit at k needs the true raw text among the first k candidates; the
    UNK string never matches real content, so predicting UNK scores nothing.
    """
    totals = {s: 0 for s in STRATA}
    hits = {s: {k: 0 for k in TOP_K} for s in STRATA}
    unk = predictor.vocab.tokens[predictor.vocab.unk_id]
    kmax = max(TOP_K)
    for f in functions:
        events = f.events
        H, probs = predictor.prepare(events)
        for p, event in enumerate(events):
            if not event.is_content or p == 0:
                continue
            cared = event.node_class is NodeClass.CARED
            in_strata = ["all"]
            if cared:
                in_strata.append("cared")
                if event.text not in train_texts:
                    in_strata.append("unseen-cared")
            in_strata = [s for s in in_strata if s in strata]
            if not in_strata:
                continue
            rank = _rank_of(predictor.suggest(events, H, probs, p, kmax).candidates, event.text)
            if event.text == unk:
                rank = None
            for s in in_strata:
                totals[s] += 1
                if rank is not None:
                    for k in TOP_K:
                        hits[s][k] += rank < k
    return EvalReport(predictor.model, split, totals, hits)


def cared_top1(predictor, functions):
    report = evaluate(predictor, functions, frozenset(), "validation", strata=("cared",))
    return report.accuracy("cared", 1)


# ---------------------------------------------------------------------------
# Comparison table
# ---------------------------------------------------------------------------

def compare_models(reports):
    """Side-by-side accuracy table for reports of one split.

    ``reports`` maps model name to EvalReport; all must agree on the
    number of scored tokens per stratum.
    """
    if not reports:
        raise DataError("nothing to compare")
    reports = dict(reports)
    first = next(iter(reports.values()))
    for name, r in reports.items():
        if r.totals != first.totals:
            raise DataError(f"stratum counts of {name!r} differ from {first.model!r}")
        if r.split != first.split:
            raise DataError(f"{name!r} was evaluated on {r.split!r}, not {first.split!r}")
    rows = []
    for s in STRATA:
        for k in TOP_K:
            rows.append({
                "stratum": s,
                "k": k,
                "total": first.totals[s],
                "accuracy": {name: round(100.0 * r.accuracy(s, k), 1) for name, r in reports.items()},
            })
    return {"split": first.split, "scope": SCOPE_NOTE, "models": list(reports), "rows": rows}


def format_comparison(table):
    """Aligned text rendering with one-decimal percentages."""
    models = table["models"]
    header = ["stratum", "top-k", "total"] + models
    body = [[r["stratum"], str(r["k"]), str(r["total"])] + [f"{r['accuracy'][m]:.1f}" for m in models]
            for r in table["rows"]]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(cells):
        return "  ".join(c.ljust(w) if i < 1 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))).rstrip()

    out = [f"# accuracy (%) on {table['split']}; {table['scope']}", line(header)]
    out += [line(row) for row in body]
    return "\n".join(out) + "\n"


_HEADER_RE = re.compile(r"^# accuracy \(%\) on (\S+); (.*)$")


def parse_comparison(text):
    """Inverse of ``format_comparison``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m = _HEADER_RE.match(lines[0]) if lines else None
    if not m:
        raise DataError("not a comparison table")
    header = lines[1].split()
    models = header[3:]
    rows = []
    for ln in lines[2:]:
        cells = ln.split()
        rows.append({
            "stratum": cells[0],
            "k": int(cells[1]),
            "total": int(cells[2]),
            "accuracy": {name: float(v) for name, v in zip(models, cells[3:])},
        })
    return {"split": m.group(1), "scope": m.group(2), "models": models, "rows": rows}


def accuracy_matrix(table):
    """``(strata*k) x models`` array of percentages, for quick inspection."""
    return np.array([[r["accuracy"][m] for m in table["models"]] for r in table["rows"]])
