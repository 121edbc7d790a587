"""Work-directory pipeline shared by the command line and the walkthroughs.

Every stage reads its inputs from the work directory, checks they were
produced under the same configuration, and writes its outputs atomically
with the config hash and the digests of the files it consumed.
"""

import hashlib
import itertools
import logging
from pathlib import Path

from .artifacts import atomic_write_text, dumps, read_artifact, write_artifact
from .corpus import Function, SplitCorpus, Vocabulary, build_vocab, split_corpus
from .errors import DataError, EmptyCorpusError, MissingArtifactError, StaleArtifactError
from .evaluation import MODELS, EvalReport, Predictor, compare_models, evaluate, format_comparison
from .models import AttenPtrHead, LanguageModel, RepHeadSet
from .numeric import ParamStore
from .syntax.ingest import ingest_directory, tokenize_source
from .syntax.lexer import ParseError, tokenize
from .syntax.linearize import dumps_events, loads_events
from .syntax.stats import repetition_stats

log = logging.getLogger(__name__)

HOLE = "__hole__"
EVENTS_DIR = "events"
SPLITS = ("validation", "test")


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Workspace:
    """One work directory under one run configuration."""

    def __init__(self, config):
        self.config = config
        self.root = Path(config.work_dir)
        self.hash = config.config_hash

    def path(self, name):
        return self.root / name

    # -- artifact helpers -------------------------------------------------

    def _write(self, name, kind, payload, inputs=()):
        payload = dict(payload)
        payload["inputs"] = {i: file_digest(self.path(i)) for i in inputs}
        return write_artifact(self.path(name), kind, payload, self.hash)

    def _read(self, name, kind):
        doc = read_artifact(self.path(name), kind, self.hash)
        for dep, digest in doc.get("inputs", {}).items():
            dep_path = self.path(dep)
            if not dep_path.exists():
                raise MissingArtifactError(f"{name} depends on missing {dep}")
            if file_digest(dep_path) != digest:
                raise StaleArtifactError(f"{name} is older than {dep}; rerun the stage that writes {name}")
        return doc

    # -- ingestion ----------------------------------------------------------

    def tokenize(self, corpus_dir=None):
        corpus_dir = Path(corpus_dir or self.config.corpus_dir or "")
        if not corpus_dir.is_dir():
            raise DataError(f"corpus directory not found: {corpus_dir}")
        files, skipped = ingest_directory(corpus_dir)
        if not files:
            raise EmptyCorpusError(f"no parseable .java files under {corpus_dir}")
        entries = []
        for rel, functions in files.items():
            out = Path(EVENTS_DIR) / (rel[:-len(".java")] + ".jsonl")
            text = dumps_events(e for f in functions for e in f.events)
            atomic_write_text(self.path(out.as_posix()), text)
            entries.append({
                "source": rel,
                "events_file": out.as_posix(),
                "functions": len(functions),
                "events": sum(len(f) for f in functions),
            })
        summary = {"files": entries, "skipped": [s.to_json() for s in skipped]}
        self._write("ingest.json", "ingest", summary, [e["events_file"] for e in entries])
        return summary

    def functions(self):
        doc = self._read("ingest.json", "ingest")
        functions = []
        for entry in doc["files"]:
            events = loads_events(self.path(entry["events_file"]).read_text(encoding="utf-8"))
            current = None
            for e in events:
                if current is None or e.function_id != current.id:
                    current = Function(e.function_id, [])
                    functions.append(current)
                current.events.append(e)
        return functions

    def stats(self, window=None):
        window = window or self.config.train.context_len
        report = repetition_stats([f.events for f in self.functions()], window)
        self._write("stats.json", "stats", report.to_json(), ["ingest.json"])
        return report

    # -- corpus -------------------------------------------------------------

    def split(self):
        corpus = split_corpus(self.functions(), self.config.train.seed)
        self._write("splits.json", "splits", {"seed": corpus.seed, **corpus.ids()}, ["ingest.json"])
        return corpus

    def load_split(self):
        doc = self._read("splits.json", "splits")
        ids = {name: doc[name] for name in ("train", "validation", "test")}
        return SplitCorpus.from_ids(self.functions(), ids, doc["seed"])

    def vocab(self):
        corpus = self.load_split()
        vocab = build_vocab([f.events for f in corpus.train], self.config.train.unk_count)
        self._write("vocab.json", "vocab", vocab.to_json(), ["splits.json"])
        return vocab

    def load_vocab(self):
        return Vocabulary.from_json(self._read("vocab.json", "vocab"))

    # -- training -----------------------------------------------------------

    def _save_log(self, name, result):
        atomic_write_text(self.path(name), result.log_lines())

    def train_lm(self):
        from .training import train_lm

        corpus, vocab = self.load_split(), self.load_vocab()
        lm, result = train_lm(corpus, vocab, self.config.train)
        self._save_log("lm.log.jsonl", result)
        self._write("lm.json", "lm-checkpoint", {
            "best_epoch": result.best_epoch,
            "params": lm.store.to_json(),
        }, ["vocab.json", "lm.log.jsonl"])
        return lm, result

    def load_lm(self):
        doc = self._read("lm.json", "lm-checkpoint")
        return LanguageModel(ParamStore.from_json(doc["params"]))

    def train_rep(self):
        from .training import train_rep

        corpus, vocab, lm = self.load_split(), self.load_vocab(), self.load_lm()
        heads, result = train_rep(corpus, lm, vocab, self.config.train)
        self._save_log("rep.log.jsonl", result)
        self._write("rep.json", "rep-checkpoint", {
            "best_epoch": result.best_epoch,
            "routing": heads.config(),
            "params": heads.store.to_json(),
        }, ["lm.json", "rep.log.jsonl"])
        return heads, result

    def load_rep(self):
        doc = self._read("rep.json", "rep-checkpoint")
        routing = doc["routing"]
        return RepHeadSet(ParamStore.from_json(doc["params"]), routing["mode"], routing["kinds"])

    def train_ptr(self):
        from .training import train_ptr

        corpus, vocab, lm = self.load_split(), self.load_vocab(), self.load_lm()
        head, result = train_ptr(corpus, lm, vocab, self.config.train)
        self._save_log("ptr.log.jsonl", result)
        self._write("ptr.json", "atten-ptr-checkpoint", {
            "best_epoch": result.best_epoch,
            "params": head.store.to_json(),
        }, ["lm.json", "ptr.log.jsonl"])
        return head, result

    def load_ptr(self):
        return AttenPtrHead(ParamStore.from_json(self._read("ptr.json", "atten-ptr-checkpoint")["params"]))

    # -- evaluation ---------------------------------------------------------

    def predictor(self, model=None):
        model = model or self.config.model
        lm, vocab = self.load_lm(), self.load_vocab()
        heads = self.load_rep() if model == "rep" else None
        ptr = self.load_ptr() if model == "atten-ptr" else None
        return Predictor(lm, vocab, model, self.config.train.context_len, heads=heads, ptr=ptr)

    def _checkpoint_names(self, model):
        return ["lm.json"] + {"rep": ["rep.json"], "atten-ptr": ["ptr.json"]}.get(model, [])

    def evaluate(self, model=None):
        model = model or self.config.model
        predictor = self.predictor(model)
        corpus = self.load_split()
        reports = {s: evaluate(predictor, getattr(corpus, s), corpus.train_texts, s) for s in SPLITS}
        self._write(f"report-{model}.json", "report", {
            "model": model,
            "splits": {s: r.to_json() for s, r in reports.items()},
        }, ["splits.json"] + self._checkpoint_names(model))
        text = "".join(format_comparison(compare_models({model: reports[s]})) for s in SPLITS)
        atomic_write_text(self.path(f"report-{model}.txt"), text)
        return reports

    def load_reports(self, model):
        doc = self._read(f"report-{model}.json", "report")
        return {s: EvalReport.from_json(doc["splits"][s]) for s in SPLITS}

    def compare(self, models=MODELS):
        loaded = {m: self.load_reports(m) for m in models}
        tables = {s: compare_models({m: loaded[m][s] for m in models}) for s in SPLITS}
        self._write("compare.json", "comparison", {"tables": tables}, [f"report-{m}.json" for m in models])
        text = "".join(format_comparison(tables[s]) for s in SPLITS)
        atomic_write_text(self.path("compare.txt"), text)
        return tables, text


# ---------------------------------------------------------------------------
# Single-prefix suggestions
# ---------------------------------------------------------------------------

_CLOSER = {"(": ")", "[": "]", "{": "}"}
_MAX_SEARCH = 8


def _closing_suffixes(source):
    """Candidate suffixes closing every open bracket of ``source``.

    A ``;`` may be needed before any closer (``for (a; b`` or ``x = y``
    before ``}``) or at the very end; variants with fewer insertions come
    first.
    """
    stack = []
    for tok in tokenize(source):
        if tok.kind == "op" and tok.value in _CLOSER:
            stack.append(tok.value)
        elif tok.kind == "op" and tok.value in _CLOSER.values() and stack:
            stack.pop()
    closers = [_CLOSER[c] for c in reversed(stack)]
    slots = len(closers) + 1
    if slots > _MAX_SEARCH:
        masks = [tuple(c == "}" for c in closers) + (not closers,), (False,) * slots]
    else:
        masks = sorted(itertools.product((False, True), repeat=slots), key=lambda m: (sum(m), m[::-1]))
    variants = []
    for mask in masks:
        out = []
        for c, semi in zip(closers, mask):
            out += [";", c] if semi else [c]
        if mask[-1]:
            out.append(";")
        variants.append(" ".join(out))
    return list(dict.fromkeys(variants))


def _find_hole(functions):
    for f in functions:
        for p, e in enumerate(f.events):
            if e.is_content and e.text == HOLE:
                return f.events[:p + 1]
    return None


def complete_prefix(prefix):
    """Parse ``prefix`` followed by an identifier placeholder.

    Returns the function's events up to and including the placeholder
    content token, whose node class tells whether the slot is cared.  A
    prefix that does not start a method is read as statements of one.
    """
    last_error = None
    for head in ("", "void __prefix__() {\n"):
        source = head + prefix + HOLE
        try:
            suffixes = _closing_suffixes(source)
        except ParseError as exc:
            raise DataError(f"unparseable prefix: {exc}") from None
        for suffix in suffixes:
            try:
                functions = tokenize_source(f"{source} {suffix}\n", "<prefix>")
            except ParseError as exc:
                last_error = exc
                continue
            events = _find_hole(functions)
            if events is not None:
                return events
    raise DataError(f"unparseable prefix: {last_error or 'no identifier slot at the end'}")


def suggest(predictor, prefix, k=10):
    """Top-``k`` candidates for the identifier slot at the end of ``prefix``."""
    events = complete_prefix(prefix)
    H, probs = predictor.prepare(events)
    result = predictor.suggest(events, H, probs, len(events) - 1, k)
    return result, events[-1]


def format_suggestion(result, slot, model):
    lines = [f"model {model}; slot: {slot.parent_kind} ({slot.node_class.value})"]
    if result.p_rep is None:
        lines.append("pointer: not used (slot is not cared or context is empty)")
    else:
        lines.append(f"pointer: gate {result.p_rep:.4f} over context {', '.join(result.context)}")
    for rank, (token, prob) in enumerate(result.candidates, 1):
        source = " ptr" if token in result.context else ""
        lines.append(f"{rank:3d}  {prob:.6f}  {token}{source}")
    return "\n".join(lines) + "\n"


def dump_json(obj):
    return dumps(obj)
