"""
Java methods as token streams
=============================

Run from the repository root:

    python walkthroughs/01_token_streams.py

Parses a few methods, shows the linearized token events, and measures how
often each class of identifier repeats something from the recent past.
"""

# %%
# A method becomes a pre-order walk over its syntax tree. Every node emits
# its kind; leaves then emit their text as a second token.
from pathlib import Path

from repcomplete.syntax import NodeClass, ingest_directory, repetition_stats, tokenize_source

source = """
class Counter {
    int total;
    int add(int step) {
        int next = total + step;
        total = next;
        return log(next);
    }
}
"""
(fn,) = tokenize_source(source, "Counter.java")
print(fn.id)
for e in fn.events:
    mark = {"cared": "*", "filtered": "-", "not-sn": " "}[e.node_class.value]
    var = " var" if e.is_variable else ""
    print(f"{e.position:3d} {mark} {'  ' if e.is_content else ''}{e.text}{var}")

# %%
# Starred entries are "cared" identifiers: the ones a copy mechanism should
# try to predict. Method names (add, log) and type names are filtered out
# because they rarely repeat within a few tokens.
cared = [e.text for e in fn.events if e.is_cared]
print("cared:", cared)

# %%
# The bundled fixture corpus is a slice of a real Java project.
fixture = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "jpype"
files, skipped = ingest_directory(fixture)
functions = [f.events for fns in files.values() for f in fns]
print(f"{len(files)} files, {len(functions)} methods, {len(skipped)} skipped")

report = repetition_stats(functions, window=25)
print(f"cared share of all events: {report.cared_fraction:.3f}")
print(f"cared share of syntax nodes: {report.cared_node_fraction:.3f}")

# %%
# How often does a token equal one of the previous 25 tokens of its class?
for cls in NodeClass:
    b = report.classes.get(cls)
    if b is not None:
        print(f"{cls.value:>9}: {b.repeated:6d} / {b.total:6d} = {b.rate:.3f}")
print(f"variables: {report.variables.rate:.3f}")
print(f"method names: {report.bucket('filtered', 'MethodInvocation').rate:.3f}")

# %%
# Longer windows can only find more repeats.
for m in (1, 5, 25, 50):
    print(m, round(repetition_stats(functions, m).classes[NodeClass.CARED].rate, 3))
