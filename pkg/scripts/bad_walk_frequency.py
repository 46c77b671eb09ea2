#!/usr/bin/env python3
"""How often a graph carries any bad walk of length <= r, as n grows."""

import argparse
import sys

from rrgwalks.harness import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=[200, 400, 1000, 2000, 4000])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--r", type=int, default=4)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = ExperimentConfig(stat="badwalks", schedule=[(n, args.d) for n in args.ns], r=args.r,
                           trials=args.trials, seed=args.seed, threads=args.threads)
    rep = run_experiment(cfg)
    print("n,d,freq_any_positive")
    for p in rep.points:
        print(f"{p.n},{p.d},{p.comparisons['freq_any_positive']!r}")
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
