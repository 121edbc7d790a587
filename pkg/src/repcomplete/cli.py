"""Command-line entry point: ``python -m repcomplete <command>``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from filelock import FileLock, Timeout

from .config import load_config
from .errors import ConfigError, NumericError, ReproError
from .evaluation import MODELS, compare_models, format_comparison
from .models import HEAD_MODES
from .pipeline import SPLITS, Workspace, format_suggestion, suggest

log = logging.getLogger("repcomplete")

# flag name -> config key
_CONFIG_FLAGS = {
    "corpus_dir": "corpus_dir",
    "work_dir": "work_dir",
    "context_len": "context_len",
    "patience": "patience",
    "seed": "seed",
    "learning_rate": "learning_rate",
    "hidden": "hidden",
    "embedding": "embedding",
    "clip": "clip",
    "heads": "heads",
    "head_kinds": "head_kinds",
    "unk_count": "unk_count",
    "max_epochs": "max_epochs",
    "model": "model",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--corpus-dir")
    g.add_argument("--work-dir")
    g.add_argument("--context-len", type=int)
    g.add_argument("--patience", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--hidden", type=int)
    g.add_argument("--embedding", type=int)
    g.add_argument("--clip", type=float)
    g.add_argument("--heads", choices=HEAD_MODES)
    g.add_argument("--head-kinds", help="comma-separated parent kinds for per-kind heads")
    g.add_argument("--unk-count", type=int)
    g.add_argument("--max-epochs", type=int)
    g.add_argument("--model", choices=MODELS)
    g.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="repcomplete", description="Token-repetition code completion for Java.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("tokenize", parents=[common], help="parse a Java corpus into token events")
    p = sub.add_parser("stats", parents=[common], help="repetition statistics per node class")
    p.add_argument("--window", type=int, help="history length (default: context length)")
    sub.add_parser("split", parents=[common], help="60/20/20 split by function")
    sub.add_parser("vocab", parents=[common], help="build the training vocabulary")
    sub.add_parser("train-lm", parents=[common], help="train the LSTM language model")
    sub.add_parser("train-rep", parents=[common], help="train REP heads on the frozen LM")
    sub.add_parser("train-ptr", parents=[common], help="train the attention pointer on the frozen LM")
    sub.add_parser("eval", parents=[common], help="stratified top-k evaluation of one model")
    p = sub.add_parser("compare", parents=[common], help="side-by-side table of evaluated models")
    p.add_argument("--models", default=",".join(MODELS), help="comma-separated model names")
    p = sub.add_parser("suggest", parents=[common], help="rank candidates after a code prefix")
    p.add_argument("prefix", help="file holding the code prefix")
    p.add_argument("-k", type=int, default=10)
    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference check of all gradients")
    p.add_argument("--tolerance", type=float, default=1e-4)
    return parser


def _overrides(args):
    return {key: getattr(args, flag) for flag, key in _CONFIG_FLAGS.items() if getattr(args, flag, None) is not None}


def _print_json(obj):
    print(json.dumps(obj, indent=1, sort_keys=True))


def _run(args, ws):
    cmd = args.command
    if cmd == "tokenize":
        summary = ws.tokenize()
        n_fn = sum(e["functions"] for e in summary["files"])
        print(f"{len(summary['files'])} files, {n_fn} functions, {len(summary['skipped'])} skipped")
        for s in summary["skipped"]:
            print(f"  skipped {s['path']}:{s['line']}:{s['column']}: {s['reason']}")
    elif cmd == "stats":
        report = ws.stats(args.window)
        doc = report.to_json()
        print(f"events {doc['total_events']}, content {doc['content_events']}, cared {doc['cared_events']} "
              f"({doc['cared_fraction']:.3f} of events, {doc['cared_node_fraction']:.3f} of nodes)")
        for name, b in doc["classes"].items():
            print(f"  {name:<10} repeated {b['repeated']:>6} / {b['total']:<6} rate {b['rate']:.3f}")
        v = doc["variables"]
        print(f"  {'variables':<10} repeated {v['repeated']:>6} / {v['total']:<6} rate {v['rate']:.3f}")
    elif cmd == "split":
        corpus = ws.split()
        print(" ".join(f"{name}={len(part)}" for name, part in corpus.parts().items()))
    elif cmd == "vocab":
        vocab = ws.vocab()
        print(f"{len(vocab)} ids, {len(vocab.unk_tokens)} tokens mapped to UNK")
    elif cmd in ("train-lm", "train-rep", "train-ptr"):
        stage = {"train-lm": ws.train_lm, "train-rep": ws.train_rep, "train-ptr": ws.train_ptr}[cmd]
        _, result = stage()
        print(f"{cmd}: {len(result.log)} epochs, best epoch {result.best_epoch}, val metric {result.best_metric:.4f}")
    elif cmd == "eval":
        model = ws.config.model
        reports = ws.evaluate(model)
        for s in SPLITS:
            sys.stdout.write(format_comparison(compare_models({model: reports[s]})))
    elif cmd == "compare":
        models = [m.strip() for m in args.models.split(",") if m.strip()]
        unknown = [m for m in models if m not in MODELS]
        if unknown or not models:
            raise ConfigError(f"unknown model(s): {', '.join(unknown) or '(none)'}")
        _, text = ws.compare(models)
        sys.stdout.write(text)
    elif cmd == "suggest":
        path = Path(args.prefix)
        if not path.is_file():
            raise ConfigError(f"prefix file not found: {path}")
        if args.k < 1:
            raise ConfigError("-k must be >= 1")
        predictor = ws.predictor()
        result, slot = suggest(predictor, path.read_text(encoding="utf-8"), args.k)
        sys.stdout.write(format_suggestion(result, slot, predictor.model))
    elif cmd == "gradcheck":
        from .gradcheck import end_to_end_check

        report = end_to_end_check(tolerance=args.tolerance, seed=ws.config.train.seed)
        print(report)
        if not report.passed:
            raise NumericError("gradient check failed")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        config = load_config(args.config, _overrides(args))
        ws = Workspace(config)
        if args.command == "gradcheck":
            _run(args, ws)
            return 0
        ws.root.mkdir(parents=True, exist_ok=True)
        try:
            with FileLock(str(ws.path(".lock")), timeout=0):
                _run(args, ws)
        except Timeout:
            raise ConfigError(f"work directory {ws.root} is in use by another command") from None
        return 0
    except ReproError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
