"""Corpus ingestion: Java files to per-function token-event sequences."""

import logging
from dataclasses import dataclass
from pathlib import Path

from .filters import DEFAULT_RULES
from .lexer import ParseError
from .linearize import linearize
from .parser import iter_functions, parse_java
from .scopes import resolve_variables

log = logging.getLogger(__name__)


@dataclass
class Function:
    """One method body as a token-event sequence."""

    id: str
    events: list

    @property
    def texts(self):
        return [e.text for e in self.events]

    def __len__(self):
        return len(self.events)


@dataclass
class SkippedFile:
    path: str
    reason: str
    line: int = 0
    column: int = 0

    def to_json(self):
        return {"path": self.path, "reason": self.reason, "line": self.line, "column": self.column}


def tokenize_source(source, path="<memory>", rules=DEFAULT_RULES):
    """Parse one source text and linearize each method body.

    Function ids are ``path:line:name`` where ``line`` is the 1-based line
    of the declaration.
    """
    unit = parse_java(source)
    resolve_variables(unit)
    functions = []
    for method in iter_functions(unit):
        line = source.count("\n", 0, method.start) + 1
        fid = f"{path}:{line}:{method.child('name').content}"
        functions.append(Function(fid, linearize(method, fid, rules)))
    return functions


def java_files(root):
    root = Path(root)
    return sorted((p for p in root.rglob("*.java") if p.is_file()), key=lambda p: p.relative_to(root).as_posix())


def ingest_directory(root, rules=DEFAULT_RULES):
    """Tokenize every ``.java`` file under ``root`` in path order.

    Returns ``(files, skipped)`` where ``files`` maps relative posix path to
    its functions. Files that fail to parse are logged and skipped.
    """
    root = Path(root)
    files, skipped = {}, []
    for path in java_files(root):
        rel = path.relative_to(root).as_posix()
        try:
            source = path.read_text(encoding="utf-8")
            files[rel] = tokenize_source(source, rel, rules)
        except ParseError as exc:
            log.warning("skipping %s: %s", rel, exc)
            skipped.append(SkippedFile(rel, exc.reason, exc.line, exc.column))
        except UnicodeDecodeError as exc:
            log.warning("skipping %s: %s", rel, exc)
            skipped.append(SkippedFile(rel, f"not UTF-8: {exc.reason}"))
    return files, skipped
