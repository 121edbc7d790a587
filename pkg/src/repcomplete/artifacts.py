"""Atomic, versioned JSON artifacts stamped with a config hash."""

import json
import os
import tempfile
from pathlib import Path

from .errors import DataError, MissingArtifactError, StaleArtifactError

FORMAT_VERSION = 1


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def write_artifact(path, kind, payload, config_hash):
    doc = {"format": kind, "version": FORMAT_VERSION, "config_hash": config_hash, **payload}
    atomic_write_text(path, dumps(doc))
    return doc


def read_artifact(path, kind, config_hash=None):
    """Load an artifact, rejecting wrong kinds, versions and stale hashes."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"missing {kind} artifact: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt artifact {path}: {exc}") from None
    if doc.get("format") != kind:
        raise DataError(f"{path} holds {doc.get('format')!r}, expected {kind!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise DataError(f"{path} has unsupported version {doc.get('version')!r}")
    if config_hash is not None and doc.get("config_hash") != config_hash:
        raise StaleArtifactError(
            f"{path} was built with config {doc.get('config_hash', '?')[:12]}, current config is {config_hash[:12]}"
        )
    return doc
