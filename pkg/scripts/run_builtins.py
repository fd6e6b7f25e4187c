"""Run every builtin scenario and write one CSV per scenario plus a timing summary."""
import argparse
import time
from pathlib import Path

from pegeom.cli import BUILTIN_NAMES, builtin, emit_report, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="reports")
    ap.add_argument("--tier", choices=("analytic", "fd"), default="analytic")
    ap.add_argument("names", nargs="*", help="subset of builtins (default: all)")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in args.names or BUILTIN_NAMES:
        start = time.perf_counter()
        reports = run_scenario(builtin(name), args.tier)
        emit_report(reports, "csv", out / f"{name}.csv")
        ok = all(r.passed for r in reports)
        failed += not ok
        print(f"{name:24s} {len(reports):2d} rows  {'PASS' if ok else 'FAIL'}  {time.perf_counter() - start:6.1f}s")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
