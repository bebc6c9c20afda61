"""Command line: ``mrnldp run|validate|list-experiments``.

Exit codes: 0 success, 1 failed acceptance check (``run --check``),
2 invalid configuration or refused enumeration, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config, validate_config
from .exceptions import BudgetError
from .experiments import run_experiment

EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 1, 2, 3


def _load(path):
    try:
        return load_config(path), None
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_IO
    except ConfigError as exc:
        for e in exc.errors:
            print(f"invalid: {e}", file=sys.stderr)
        return None, EXIT_CONFIG


def cmd_validate(args) -> int:
    cfg, code = _load(args.config)
    if cfg is None:
        return code
    errors, warnings = validate_config(cfg)
    for w in warnings:
        print(f"warning: {w}")
    for e in errors:
        print(f"invalid: {e}")
    if errors:
        return EXIT_CONFIG
    print("ok")
    return 0


def cmd_run(args) -> int:
    cfg, code = _load(args.config)
    if cfg is None:
        return code
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        summary = run_experiment(cfg, out_dir=args.out, workers=args.workers)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name, ok in sorted(summary["pass"].items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if args.check and not all(summary["pass"].values()):
        return EXIT_CHECK
    return 0


def cmd_list(args) -> int:
    for name, desc in EXPERIMENTS.items():
        print(f"{name:16s} {desc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrnldp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides config 'output')")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--workers", type=int, help="worker processes (does not change results)")
    p.add_argument("--check", action="store_true", help="exit 1 if any acceptance check fails")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config file without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-experiments", help="list experiment kinds")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
