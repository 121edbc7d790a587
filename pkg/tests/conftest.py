import re
from dataclasses import dataclass
from pathlib import Path

import pytest

from repcomplete.corpus import build_vocab, split_corpus
from repcomplete.synthetic import build_corpus
from repcomplete.syntax import ingest_directory
from repcomplete.training import TrainConfig, train_lm, train_ptr, train_rep

FIXTURES = Path(__file__).parent / "fixtures"
JPYPE = FIXTURES / "jpype"

# small but otherwise default settings for synthetic training runs
SYNTH_CONFIG = TrainConfig(hidden=32, embedding=32, max_epochs=40)


@dataclass
class Trained:
    corpus: object
    vocab: object
    lm: object
    lm_result: object
    heads: object = None
    rep_result: object = None
    ptr: object = None
    ptr_result: object = None


@pytest.fixture(scope="session")
def jpype_functions():
    files, skipped = ingest_directory(JPYPE)
    assert not skipped
    return [f for fns in files.values() for f in fns]


def _train(kind, n, with_ptr=False):
    corpus = split_corpus(build_corpus(kind, n, seed=0), seed=0)
    vocab = build_vocab([f.events for f in corpus.train], SYNTH_CONFIG.unk_count)
    lm, lm_result = train_lm(corpus, vocab, SYNTH_CONFIG)
    heads, rep_result = train_rep(corpus, lm, vocab, SYNTH_CONFIG)
    out = Trained(corpus, vocab, lm, lm_result, heads, rep_result)
    if with_ptr:
        out.ptr, out.ptr_result = train_ptr(corpus, lm, vocab, SYNTH_CONFIG)
    return out


@pytest.fixture(scope="session")
def pointer_run():
    return _train("pointer-advantage", 500, with_ptr=True)


@pytest.fixture(scope="session")
def always_repeat_run():
    return _train("always-repeat", 100)


@pytest.fixture(scope="session")
def zero_repetition_run():
    return _train("zero-repetition", 100)


# one summary line per acceptance criterion
_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        passed = report.outcome == "passed" and _outcomes.get(n, (True,))[0]
        _outcomes[n] = (passed, report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        passed, name = _outcomes[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  ({name})")
