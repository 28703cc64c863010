"""Command line entry point: ``rwtail {run,validate,list}``.

Exit status: 0 pass, 1 fail, 2 inconclusive, 3 configuration error,
4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import RWTailError
from ..serialize import jsonable
from .config import OUT_DIR_ENV, ConfigError, load_config, resolve_output_dir, validate
from .experiments import list_experiments
from .runner import run

EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2}
EXIT_CONFIG = 3
EXIT_RUNTIME = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwtail", description="Randomly weighted heavy-tailed sums: experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, metavar="PATH")
    p_run.add_argument("--out", metavar="DIR", help=f"output directory (default: ${OUT_DIR_ENV} or ./rwtail-out)")
    p_run.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    p_run.add_argument("--quiet", action="store_true")
    p_val = sub.add_parser("validate", help="check a config and print the resolved form")
    p_val.add_argument("--config", required=True, metavar="PATH")
    p_val.add_argument("--seed", type=int, metavar="N")
    p_val.add_argument("--quiet", action="store_true")
    p_list = sub.add_parser("list", help="list available experiments")
    p_list.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = (lambda *a: None) if getattr(args, "quiet", False) else print

    if args.command == "list":
        for name, desc, result in list_experiments():
            print(f"{name:<18} {desc}  [exercises: {result}]")
        return 0

    try:
        cfg = validate(load_config(args.config), args.seed)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        say(json.dumps(jsonable(cfg.to_dict()), indent=2, sort_keys=True))
        return 0

    out_dir = resolve_output_dir(args.out, cfg)
    try:
        report = run(cfg, out_dir)
    except RWTailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    say(f"{cfg.experiment}: {report.verdict} ({report.wall_clock_s:.2f} s) -> {out_dir}")
    return EXIT_CODES[report.verdict]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
