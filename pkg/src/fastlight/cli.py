"""Command-line entry point.

Exit codes: 0 success, 2 config/argument parse error, 3 validation error,
4 numerical failure during a run, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import MODES, apply_overrides, parse_config
from .errors import ConfigError, NumericalError, ValidationError
from .runs import run_command

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastlight",
        description="Simulate fast-light sech pulses and superfluorescence "
        "in an inverted two-level gain medium.",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="config file (omit for the built-in defaults)")
    parser.add_argument("--mode", choices=MODES, default=None,
                        help="run mode (overrides run.mode from the config)")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default: run.out or ./fastlight-out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override run.seed (64-bit unsigned)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for sweep mode")
    parser.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"fastlight: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    overrides = list(args.override)
    if args.mode is not None:
        overrides.append(f"run.mode={args.mode}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    try:
        cfg = apply_overrides(parse_config(text), overrides)
    except ConfigError as exc:
        print(f"fastlight: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"fastlight: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = args.out or Path(cfg.run["out"] or "fastlight-out")
    if args.jobs < 1:
        print("fastlight: --jobs must be >= 1", file=sys.stderr)
        return EXIT_PARSE

    try:
        manifest = run_command(cfg, out_dir, jobs=args.jobs)
    except ValidationError as exc:
        print(f"fastlight: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"fastlight: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"fastlight: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"fastlight: {manifest.mode} run complete, outputs in {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
