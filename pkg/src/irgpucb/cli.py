"""Command-line entry point: ``irgpucb run|calc|validate|version``.

Exit codes: 0 success, 1 input error, 2 numerical error, 3 failed validation checks.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .confidence import DomainInfo, beta_gpucb, discretization_size, gamma_kappa, irgpucb_params
from .errors import InputError, NumericalError


def _domain(args):
    if args.domain_size is not None:
        return DomainInfo.finite(args.domain_size)
    if None in (args.a, args.b, args.d):
        raise InputError("give --domain-size N for a finite domain, or --a --b --d [--r] for a continuous one")
    return DomainInfo.continuous(args.a, args.b, args.r, args.d)


def cmd_horizon(args):
    from .kernel import KernelSpec
    from .validate import bsr_horizon, default_grid

    if args.eta is None:
        raise InputError("horizon needs --eta")
    d = args.d or 3
    grid = default_grid(args.grid_size, d, args.grid_spacing)
    if args.a is not None and args.b is not None:
        dom = DomainInfo.continuous(args.a, args.b, args.r, d)
    else:
        dom = DomainInfo.finite(len(grid), d=d)
    kern = KernelSpec.isotropic(args.length_scale, d)
    res = bsr_horizon(args.eta, dom, kern, grid, args.noise_variance)
    T = res.T if res.satisfied else "none"
    print(f"horizon eta={args.eta:g}: T={T}  gamma_T~{res.gamma_T:.6f}  bound={res.lhs:.6f}  ({res.note})")
    return 0


def cmd_calc(args):
    if args.quantity == "horizon":
        return cmd_horizon(args)
    dom = _domain(args)
    ts = args.t or [1]
    for t in ts:
        if args.quantity == "beta":
            print(f"beta t={t}: {beta_gpucb(dom, t):.6f}")
        elif args.quantity == "s":
            if args.eta is not None:
                s, lam = irgpucb_params(dom, "accuracy", eta=args.eta)
            elif dom.is_finite:
                s, lam = irgpucb_params(dom, "finite")
            else:
                s, lam = irgpucb_params(dom, "continuous", t=t)
            print(f"s t={t}: {s:.6f}  lambda={lam:g}  mean={s + 1 / lam:.6f}")
        elif args.quantity == "kappa":
            size = dom.cardinality if dom.is_finite else discretization_size(dom, t)
            k = gamma_kappa(size, t, args.theta)
            print(f"kappa t={t}: {k:.6f}  theta={args.theta:g}  mean={k * args.theta:.6f}")
    return 0


def cmd_run(args):
    from .harness import ExperimentConfig, export, run_experiment

    cfg = ExperimentConfig.from_file(args.config)
    if args.trials is not None:
        cfg.n_trials = args.trials
    if args.out is not None:
        cfg.out_dir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    cfg.validate()
    report = run_experiment(cfg)
    paths = export(report, cfg.out_dir)
    for line in report.summary_lines():
        print(line)
    print(f"wrote {len(paths)} files to {cfg.out_dir}")
    return 0


def cmd_validate(args):
    from .validate import run_suite, write_reports_csv

    reports = run_suite(args.suite, seed=args.seed)
    for r in reports:
        print(r.line())
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"validate_{args.suite}_seed{args.seed}.csv")
    write_reports_csv(reports, path)
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports) - n_fail}/{len(reports)} checks passed; report written to {path}")
    return 0 if n_fail == 0 else 3


def build_parser():
    p = argparse.ArgumentParser(prog="irgpucb", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a BO experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--out")
    run.add_argument("--workers", type=int)
    run.set_defaults(func=cmd_run)

    calc = sub.add_parser("calc", help="confidence-parameter calculator")
    calc.add_argument("quantity", choices=["beta", "s", "kappa", "horizon"])
    calc.add_argument("--domain-size", type=int)
    calc.add_argument("--t", type=int, nargs="+")
    calc.add_argument("--theta", type=float, default=1.0)
    calc.add_argument("--eta", type=float)
    calc.add_argument("--a", type=float)
    calc.add_argument("--b", type=float)
    calc.add_argument("--r", type=float, default=1.0)
    calc.add_argument("--d", type=int)
    calc.add_argument("--grid-size", type=int, default=10, help="horizon: points per dimension")
    calc.add_argument("--grid-spacing", type=float, default=0.1, help="horizon: grid step")
    calc.add_argument("--length-scale", type=float, default=0.1, help="horizon: SE length scale")
    calc.add_argument("--noise-variance", type=float, default=1e-4, help="horizon: noise variance")
    calc.set_defaults(func=cmd_calc)

    val = sub.add_parser("validate", help="run a validation suite")
    val.add_argument("--suite", default="all",
                     choices=["coverage", "maxbound", "mgf", "infogain", "tails", "samplers", "all"])
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out")
    val.set_defaults(func=cmd_validate)

    ver = sub.add_parser("version", help="print the package version")
    ver.set_defaults(func=lambda args: print(__version__) or 0)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
