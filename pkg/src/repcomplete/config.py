"""Run configuration: a ``key = value`` file plus command-line overrides."""

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .evaluation import MODELS
from .training import TrainConfig

PATH_KEYS = ("corpus_dir", "work_dir")
_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    corpus_dir: str = None
    work_dir: str = "work"
    model: str = "rep"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {', '.join(MODELS)}, got {self.model!r}")

    @property
    def config_hash(self):
        """Hash of the training settings; paths and the model selector are excluded."""
        return self.train.digest()

    @property
    def work(self):
        return Path(self.work_dir)


def _train_fields():
    return {f.name: f for f in fields(TrainConfig)}


def known_keys():
    return sorted(set(_train_fields()) | set(PATH_KEYS) | {"model"})


def _normalize(key):
    return key.strip().lower().replace("-", "_")


def _convert(name, raw):
    default = getattr(TrainConfig(), name)
    try:
        if isinstance(default, tuple):
            return tuple(k.strip() for k in str(raw).split(",") if k.strip()) if isinstance(raw, str) else tuple(raw)
        if isinstance(default, bool):
            raise TypeError
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into a raw key dict."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    if parser.sections() != [_SECTION]:
        raise ConfigError("config files take plain key = value lines, no sections")
    return {_normalize(k): v for k, v in parser.items(_SECTION)}


def build_config(values=None, base=None):
    """Apply a key dict on top of ``base`` (default settings); unknown keys are rejected."""
    base = base or RunConfig()
    values = {_normalize(k): v for k, v in (values or {}).items() if v is not None}
    unknown = sorted(set(values) - set(known_keys()))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    train_updates = {k: _convert(k, v) for k, v in values.items() if k in _train_fields()}
    run_updates = {k: str(v) for k, v in values.items() if k in PATH_KEYS or k == "model"}
    return replace(base, train=replace(base.train, **train_updates), **run_updates)


def load_config(path=None, overrides=None):
    """Config file (optional) first, then overrides such as parsed CLI flags."""
    values = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values = parse_config_text(path.read_text(encoding="utf-8"))
    config = build_config(values)
    return build_config(overrides, base=config) if overrides else config
