"""Confidence-parameter schedules for |X| = 1000 as an SVG, plus a table at selected t.

Plots beta_t of GP-UCB, the mean kappa_t * theta of the Gamma schedule, the
constant mean s + 2 of the two-parameter exponential law, and one sampled
zeta_t path of each randomized schedule.
"""

import argparse
import sys

import numpy as np

from irgpucb import rng as rngs
from irgpucb.confidence import DomainInfo, expected_zeta, make_schedule, sample_zeta
from irgpucb.plotting import svg_line_plot


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--domain-size", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=500)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="schedules.svg")
    args = p.parse_args()

    dom = DomainInfo.finite(args.domain_size)
    ts = np.arange(1, args.horizon + 1)
    gp = make_schedule("gp_ucb", dom)
    gam = make_schedule("rgp_ucb", dom, theta=args.theta)
    irgp = make_schedule("irgp_ucb", dom)
    rng = rngs.stream(args.seed, "validate", "schedules")
    series = {
        "GP-UCB beta_t": (ts, np.array([gp.value(t) for t in ts])),
        "Gamma E[zeta_t]": (ts, np.array([expected_zeta(gam, t) for t in ts])),
        "IRGP-UCB E[zeta_t]": (ts, np.array([expected_zeta(irgp, t) for t in ts])),
        "Gamma sample": (ts, np.array([sample_zeta(gam, t, rng) for t in ts])),
        "IRGP-UCB sample": (ts, np.array([sample_zeta(irgp, t, rng) for t in ts])),
    }
    with open(args.out, "w") as fh:
        fh.write(svg_line_plot(series, title=f"Confidence parameters, |X|={args.domain_size}",
                               xlabel="t", ylabel="beta_t / zeta_t"))

    print(f"{'t':>6} {'beta_t':>10} {'E gamma':>10} {'E irgp':>10}")
    for t in (1, 10, 100, 500, 1000):
        print(f"{t:>6} {gp.value(t):>10.3f} {expected_zeta(gam, t):>10.3f} {expected_zeta(irgp, t):>10.3f}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
