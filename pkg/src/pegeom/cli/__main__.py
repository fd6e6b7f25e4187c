"""Command-line entry point: ``python3 -m pegeom.cli`` or ``pegeom-verify``."""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from ..errors import GeometryError, ParseError, ScenarioValidationError
from .builtins import BUILTIN_NAMES, builtin
from .config import load_scenario
from .runner import TIERS, emit_report, run_scenario

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_STAGE = 0, 1, 2, 3


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pegeom-verify",
                                description="Run a verification scenario and write a CSV or plain report.")
    p.add_argument("--scenario", help="scenario file path or builtin name")
    p.add_argument("--seed", type=_u64, help="override the scenario seed")
    p.add_argument("--samples", type=_positive, help="override the number of sample points")
    p.add_argument("--tol-tier", choices=TIERS, default="analytic",
                   help="analytic jets (default) or finite-difference jets with the looser tier")
    p.add_argument("--out", help="output path (default: scenario output, else stdout)")
    p.add_argument("--format", choices=("csv", "plain"), default="csv")
    p.add_argument("--list-builtins", action="store_true", help="print builtin scenario names and exit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_builtins:
        print("\n".join(BUILTIN_NAMES))
        return EXIT_OK
    if not args.scenario:
        print("error: --scenario is required (or use --list-builtins)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.scenario in BUILTIN_NAMES and not os.path.exists(args.scenario):
            config = builtin(args.scenario)
        else:
            config = load_scenario(Path(args.scenario))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioValidationError as exc:
        print("invalid scenario:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    config = dataclasses.replace(config, **overrides)
    try:
        reports = run_scenario(config, args.tol_tier)
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    out = args.out or config.output
    try:
        emit_report(reports, args.format, out)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
