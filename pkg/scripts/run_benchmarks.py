"""Heuristic-schedule comparison on the negated HolderTable, CrossInTray and Ackley functions.

Each benchmark is restricted to a scrambled Sobol pool of its box, starts
from 2^d random points, and refits ARD length scales every 5 iterations.
"""

import argparse
import os
import sys

from irgpucb.harness import ExperimentConfig, export, run_experiment
from irgpucb.objective import BENCHMARKS

POLICIES = ["gp_ucb_heuristic", "rgp_ucb_heuristic", "irgp_ucb_heuristic", "ei", "ts"]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--benchmarks", nargs="+", default=sorted(BENCHMARKS))
    p.add_argument("--policies", nargs="+", default=POLICIES)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--horizon", type=int, default=150)
    p.add_argument("--pool-size", type=int, default=2048)
    p.add_argument("--out", default="results/benchmarks")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    for name in args.benchmarks:
        dim = BENCHMARKS[name][0]
        cfg = ExperimentConfig(
            objective=name, pool_size=args.pool_size, length_scales=[0.2] * dim, fit_every=5,
            hyper_budget=150, standardize_y=True, policies=args.policies, horizon=args.horizon,
            n_trials=args.trials, n_initial=2**dim, out_dir=os.path.join(args.out, name),
        )
        report = run_experiment(cfg, workers=args.workers)
        export(report, cfg.out_dir)
        print(f"== {name} (d={dim}, pool={args.pool_size}, max over pool={report.traces[args.policies[0]][0].true_max:.5g})")
        for line in report.summary_lines():
            print("  " + line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
