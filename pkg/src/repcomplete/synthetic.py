"""Synthetic Java corpora with known repetition structure.

Each generator emits plain Java source, so the corpora exercise the real
parser, resolver and filter rather than hand-built token events.

* ``always_repeat``: one fresh local per method, used over and over; every
  cared token after the declaration repeats the most recent cared token.
* ``most_recent``: blocks of two pool arguments, a fresh local and one use
  of it; every repeat copies the newest cared token, and the context window
  holds a single declaration.
* ``zero_repetition``: cared names never repeat inside a method.
* ``pointer_advantage``: a fresh local (never seen outside its method) mixed
  with a parameter from a small shared pool, in fixed syntactic roles.
  One-off method names and literals push the per-method singletons past the
  default UNK budget, so the shared tokens keep real ids.
"""

import string
from pathlib import Path

from .numeric import make_rng
from .syntax.ingest import tokenize_source

KINDS = ("always-repeat", "most-recent", "zero-repetition", "pointer-advantage")
PARAM_POOL = ("alpha", "beta", "gamma", "delta", "omega", "sigma", "theta", "kappa")
NAME_POOL = tuple(f"{a}{b}" for a in ("red", "tan", "sky", "fog", "ice", "oak") for b in ("Cup", "Box", "Pin", "Jar", "Net"))
METHODS_PER_CLASS = 50


class _Names:
    """Fresh identifiers that never collide with each other or the pools."""

    def __init__(self, rng):
        self.rng = rng
        self.used = set(PARAM_POOL) | set(NAME_POOL)

    def fresh(self, prefix):
        letters = string.ascii_lowercase
        while True:
            name = prefix + "".join(self.rng.choice(list(letters), size=6))
            if name not in self.used:
                self.used.add(name)
                return name


def _always_repeat(i, rng, names):
    v = names.fresh("v")
    ops = ["+", "-", "*"]
    lines = [f"int {v} = 0;"]
    for j in range(10):
        if j % 3 == 2:
            lines.append(f"emit({v}, {v});")
        else:
            lines.append(f"{v} = {v} {ops[int(rng.integers(3))]} {int(rng.integers(1, 9))};")
    return f"void {names.fresh('r')}() {{\n" + "".join(f"        {ln}\n" for ln in lines) + "    }"


def _most_recent(i, rng, names):
    lines = []
    previous = []
    for j in range(5):
        # no name repeats the previous block, so the newest entry is the only match
        pool = [n for n in NAME_POOL if n not in previous]
        a, b, v = rng.choice(pool, size=3, replace=False)
        previous = [a, b, v]
        lines += [f"call({a}, {b});", f"int {v} = {j};", f"emit({v});"]
    return f"void {names.fresh('q')}() {{\n" + "".join(f"        {ln}\n" for ln in lines) + "    }"


def _zero_repetition(i, rng, names):
    a, b, c, d, e, f, g, h = rng.choice(NAME_POOL, size=8, replace=False)
    body = [
        f"int {a} = 1;",
        f"int {b} = 2;",
        f"call({c}, {d});",
        f"{e}.run({f});",
        f"int {g} = {h} + 3;",
    ]
    return f"void {names.fresh('z')}() {{\n" + "".join(f"        {ln}\n" for ln in body) + "    }"


def _pointer_advantage(i, rng, names):
    p = PARAM_POOL[int(rng.integers(len(PARAM_POOL)))]
    v = names.fresh("t")
    number = 1000 + i
    text = names.fresh("s")
    body = [
        f"int {v} = {p} + {number};",
        f"{v} = {v} * {p};",
        f'log("{text}", {v});',
        f"if ({v} > {p}) {{",
        f"    {v} = {p};",
        "}",
        f"return {v} + {p};",
    ]
    return f"int {names.fresh('m')}(int {p}) {{\n" + "".join(f"        {ln}\n" for ln in body) + "    }"


_GENERATORS = {
    "always-repeat": _always_repeat,
    "most-recent": _most_recent,
    "zero-repetition": _zero_repetition,
    "pointer-advantage": _pointer_advantage,
}


def corpus_sources(kind, n_functions, seed=0):
    """Java sources ``{relative path: text}`` holding ``n_functions`` methods."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown synthetic corpus {kind!r}")
    rng = make_rng(seed, stream=7)
    names = _Names(rng)
    gen = _GENERATORS[kind]
    methods = [gen(i, rng, names) for i in range(n_functions)]
    files = {}
    for start in range(0, n_functions, METHODS_PER_CLASS):
        cls = f"Gen{start // METHODS_PER_CLASS:03d}"
        chunk = methods[start:start + METHODS_PER_CLASS]
        files[f"{cls}.java"] = f"class {cls} {{\n" + "\n".join(f"    {m}\n" for m in chunk) + "}\n"
    return files


def build_corpus(kind, n_functions, seed=0):
    """Parsed functions of a synthetic corpus, in file then source order."""
    functions = []
    for path, source in sorted(corpus_sources(kind, n_functions, seed).items()):
        functions.extend(tokenize_source(source, path))
    return functions


def write_corpus(root, kind, n_functions, seed=0):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for path, source in corpus_sources(kind, n_functions, seed).items():
        (root / path).write_text(source, encoding="utf-8")
    return root
