"""Vocabulary, function-level splits and cared-only context windows."""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EmptyCorpusError
from .numeric import make_rng
from .syntax.filters import NodeClass
from .syntax.ingest import Function  # noqa: F401  (re-exported)

UNK = "<unk>"
DEFAULT_UNK_COUNT = 1000
SPLIT_FRACTIONS = (0.6, 0.2, 0.2)
SPLIT_NAMES = ("train", "validation", "test")


class Vocabulary:
    """Token/id map over the training split; id 0 is the shared UNK."""

    def __init__(self, tokens, frequencies, unk_tokens=()):
        if not tokens or tokens[0] != UNK:
            raise ValueError("vocabulary must start with the UNK token")
        self.tokens = list(tokens)
        self.frequencies = dict(frequencies)
        self.unk_tokens = frozenset(unk_tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.unk_id = 0
        # rank of each id in lexicographic token order (tie-breaking in rankings)
        order = sorted(range(len(self.tokens)), key=lambda i: self.tokens[i])
        self.lex_rank = np.empty(len(self.tokens), dtype=np.int64)
        self.lex_rank[order] = np.arange(len(self.tokens))

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index and token != UNK

    def encode(self, token):
        return self.index.get(token, self.unk_id)

    def encode_sequence(self, texts):
        return np.fromiter((self.index.get(t, 0) for t in texts), dtype=np.int64, count=len(texts))

    def decode(self, token_id):
        return self.tokens[token_id]

    def to_json(self):
        return {
            "tokens": self.tokens,
            "frequencies": dict(sorted(self.frequencies.items())),
            "unk_tokens": sorted(self.unk_tokens),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["tokens"], obj["frequencies"], obj["unk_tokens"])


def unk_budget(distinct, unk_count=DEFAULT_UNK_COUNT):
    """Number of tokens mapped to UNK: never the single most frequent one."""
    return max(0, min(unk_count, distinct - 1))


def build_vocab(sequences, unk_count=DEFAULT_UNK_COUNT):
    """Build a vocabulary from training sequences of texts or events.

    The ``unk_budget`` least frequent tokens become UNK; ties at the
    cutoff go by lexicographic order.
    """
    freq = Counter()
    for seq in sequences:
        freq.update(t if isinstance(t, str) else t.text for t in seq)
    if not freq:
        raise EmptyCorpusError("cannot build a vocabulary from an empty training set")
    ascending = sorted(freq, key=lambda t: (freq[t], t))
    n_unk = unk_budget(len(freq), unk_count)
    unk, kept = ascending[:n_unk], ascending[n_unk:]
    kept.sort(key=lambda t: (-freq[t], t))
    return Vocabulary([UNK] + kept, freq, unk)


def split_counts(n, fractions=SPLIT_FRACTIONS):
    """Largest-remainder apportionment of ``n`` functions.

    Every part stays within one function of its exact share; leftover
    functions go to the largest fractional remainders (train first on ties).
    """
    exact = [n * f for f in fractions]
    counts = [int(np.floor(x)) for x in exact]
    left = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return tuple(counts)


@dataclass
class SplitCorpus:
    train: list
    validation: list
    test: list
    seed: int = 0
    _train_texts: set = field(default=None, repr=False)

    def parts(self):
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def ids(self):
        return {name: [f.id for f in part] for name, part in self.parts().items()}

    @property
    def train_texts(self):
        """Every token text occurring in the training split."""
        if self._train_texts is None:
            self._train_texts = {e.text for f in self.train for e in f.events}
        return self._train_texts

    @classmethod
    def from_ids(cls, functions, ids, seed=0):
        by_id = {f.id: f for f in functions}
        missing = [i for part in ids.values() for i in part if i not in by_id]
        if missing:
            raise DataError(f"split refers to unknown functions, e.g. {missing[0]!r}")
        return cls(*[[by_id[i] for i in ids[name]] for name in SPLIT_NAMES], seed=seed)


def split_corpus(functions, seed=0, fractions=SPLIT_FRACTIONS):
    """Shuffle functions with a seeded generator and cut 60/20/20."""
    functions = list(functions)
    if len(functions) < 5:
        raise DataError(f"need at least 5 functions to split, got {len(functions)}")
    ids = [f.id for f in functions]
    if len(set(ids)) != len(ids):
        raise DataError("function ids must be unique")
    perm = make_rng(seed, stream=1).permutation(len(functions))
    shuffled = [functions[i] for i in perm]
    n_train, n_val, _ = split_counts(len(functions), fractions)
    return SplitCorpus(
        shuffled[:n_train],
        shuffled[n_train:n_train + n_val],
        shuffled[n_train + n_val:],
        seed=seed,
    )


@dataclass(frozen=True)
class ContextWindow:
    positions: tuple
    m: int


def context_window(sequence, pos, m):
    """Cared content positions among the ``m`` events before ``pos``, oldest first."""
    if m < 1:
        raise ValueError("context length must be >= 1")
    if not 0 <= pos < len(sequence):
        raise IndexError(pos)
    lo = max(0, pos - m)
    return ContextWindow(
        tuple(k for k in range(lo, pos) if sequence[k].node_class is NodeClass.CARED),
        m,
    )
