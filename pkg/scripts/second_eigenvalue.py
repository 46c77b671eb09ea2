#!/usr/bin/env python3
"""Distribution of max(lambda_2, |lambda_n|) over seeds, against 2 sqrt(2d-1)."""

import argparse
import json
import sys

from rrgwalks.harness import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--trials-csv", help="also write per-seed values here")
    args = ap.parse_args()

    cfg = ExperimentConfig(stat="lambda2", n=args.n, d=args.d, trials=args.trials, seed=args.seed,
                           m=args.m, threads=args.threads)
    rep = run_experiment(cfg)
    if args.trials_csv:
        with open(args.trials_csv, "w") as fh:
            fh.write(rep.trials_csv())
    summary = dict(rep.points[0].comparisons)
    summary.update(rep.provenance)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
