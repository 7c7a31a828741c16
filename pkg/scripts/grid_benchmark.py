#!/usr/bin/env python3
"""Compare samplers on the two-block lattice benchmark.

Writes the accuracy curves to CSV and prints a checkpoint summary.
"""

import argparse
import sys

from gmrf_active import ExperimentConfig, Strategy, emit_csv, emit_summary, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=10)
    parser.add_argument("--cols", type=int, default=10)
    parser.add_argument("--budget", type=int, default=30)
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--delta", type=float, default=0.005)
    parser.add_argument("--confidence", default="inv_sqrt")
    parser.add_argument("--strategies", default="tv,msd,klg,vm,sigma-opt,unc,random")
    parser.add_argument("--out", default="grid_results.csv")
    args = parser.parse_args()

    cfg = ExperimentConfig(
        graph=f"grid:{args.rows}x{args.cols}",
        strategies=[Strategy(k, confidence=args.confidence)
                    for k in args.strategies.split(",")],
        budget=args.budget,
        runs=args.runs,
        seed=args.seed,
        delta=args.delta,
    )
    results = run_experiment(cfg)
    emit_csv(results, args.out)
    print(emit_summary(results))
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
