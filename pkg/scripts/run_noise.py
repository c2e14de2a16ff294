#!/usr/bin/env python3
"""Pixel-noise sweep: mean error with standard error per level, plus a text table."""

import argparse
import json
import sys

from mppose.bench import BenchConfig, bench_noise, noise_trend_violations, summarize_noise
from mppose.io import write_report


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials-per-level", type=int, default=1000)
    ap.add_argument("--levels", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--csv", default="noise.csv")
    ap.add_argument("--summary", default="noise_summary.json")
    args = ap.parse_args(argv)

    levels = [float(x) for x in args.levels.split(",")]
    rows = bench_noise(levels, BenchConfig(trials=args.trials_per_level, seed=args.seed, threads=args.threads))
    with open(args.csv, "w", newline="") as fh:
        write_report(rows, fh)
    summary = summarize_noise(rows)
    bad = noise_trend_violations(summary)
    with open(args.summary, "w") as fh:
        json.dump({"levels": summary, "trend_violations": bad}, fh, indent=2)

    print(f"{'solver':6} {'px':>5} {'rot deg':>12} {'+-se':>10} {'trans':>12} {'+-se':>10}")
    for solver, per in summary.items():
        for e in per:
            print(
                f"{solver:6} {e['noise_px']:5.1f} {e['rot_err_deg_mean']:12.4g} {e['rot_err_deg_se']:10.2g}"
                f" {e['trans_err_mean']:12.4g} {e['trans_err_se']:10.2g}"
            )
    print("trend violations:", bad or "none")
    return 0 if not bad else 1


if __name__ == "__main__":
    sys.exit(main())
