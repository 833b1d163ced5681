#!/usr/bin/env python3
"""Run simulation suites and write one CSV/JSON table pair per suite.

By default every suite runs at its desk-scale rep count, which keeps the
whole sweep in the tens of minutes. Pass explicit suite names to rerun a
subset, --reps to override the per-suite default (e.g. 5000 for
table-scale numbers), and --threads to fan replications out across
processes.
"""

import argparse
import os
import sys
import time

from splitargmin.harness import run_suite, suite_names, write_csv, write_json


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("suites", nargs="*", metavar="SUITE",
                        help=f"suites to run (default: all of {', '.join(suite_names())})")
    parser.add_argument("--reps", type=int, help="override the per-suite default")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    unknown = [name for name in args.suites if name not in suite_names()]
    if unknown:
        parser.error(f"unknown suite(s): {', '.join(unknown)}")
    chosen = args.suites or list(suite_names())
    os.makedirs(args.out, exist_ok=True)
    for name in chosen:
        started = time.perf_counter()
        rows = run_suite(name, reps=args.reps, seed=args.seed, threads=args.threads)
        minutes = (time.perf_counter() - started) / 60.0
        write_csv(rows, os.path.join(args.out, f"{name}.csv"))
        write_json(rows, os.path.join(args.out, f"{name}.json"))
        print(f"{name}: {len(rows)} rows in {minutes:.1f} min -> {args.out}/{name}.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
