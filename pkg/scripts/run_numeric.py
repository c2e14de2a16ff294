#!/usr/bin/env python3
"""Noiseless accuracy and timing for both solvers; writes a CSV and a JSON summary."""

import argparse
import json
import sys

from mppose.bench import BenchConfig, bench_numeric, summarize_numeric
from mppose.io import write_report


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--central", action="store_true")
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--csv", default="numeric.csv")
    args = ap.parse_args(argv)

    rows = bench_numeric(BenchConfig(trials=args.trials, seed=args.seed, central=args.central, threads=args.threads))
    with open(args.csv, "w", newline="") as fh:
        write_report(rows, fh)
    summary = summarize_numeric(rows)
    json.dump(summary, sys.stdout, indent=2)
    print()
    for solver, s in summary.items():
        print(f"{solver}: recovered {s['recovered_fraction']:.4%}, median {s['median_time_us']:.0f} us", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
