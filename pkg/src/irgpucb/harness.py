"""Experiment orchestration: the BO loop, regret bookkeeping, aggregation, and export."""

import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngs
from .acquisition import Policy, grid_candidates, select_next
from .confidence import DomainInfo, make_schedule
from .errors import InputError, NumericalError
from .gp import fit_posterior, optimize_hyperparameters, predict_many
from .kernel import KernelSpec
from .objective import benchmark_objective, load_tabular, sample_gp_function
from .plotting import svg_line_plot

log = logging.getLogger(__name__)

POLICY_NAMES = (
    "gp_ucb", "gp_ucb_heuristic", "rgp_ucb", "rgp_ucb_heuristic", "irgp_ucb",
    "irgp_ucb_accuracy", "irgp_ucb_heuristic", "tn_ucb", "ei", "ts",
)
TRACE_HEADER = ["trial", "iter", "x", "y", "zeta", "simple_regret", "cumulative_regret"]
AGGREGATE_HEADER = ["iter", "mean_sr", "stderr_sr", "mean_cr", "mean_zeta"]


def fmt(v):
    """Decimal text with 17 significant digits (round-trips every double)."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(float(v), ".17g")


@dataclass
class ExperimentConfig:
    """Flat experiment description; every field maps 1:1 onto a config-file key."""

    objective: str = "gp_sample"
    dim: int = 3
    grid_size: int = 10
    grid_spacing: float = 0.1
    tabular_path: str | None = None
    normalize: bool = True
    pool_size: int = 4096
    kernel_family: str = "SquaredExponential"
    length_scales: list = field(default_factory=lambda: [0.1])
    output_scale: float = 1.0
    fit_every: int = 5
    hyper_budget: int = 300
    policies: list = field(default_factory=lambda: ["irgp_ucb"])
    theta: float = 1.0
    eta: float | None = None
    heuristic_c: float = 0.2
    a: float | None = None
    b: float | None = None
    r: float = 1.0
    noise_variance: float = 1e-4
    standardize_y: bool = False
    horizon: int = 100
    n_trials: int = 10
    designs_per_function: int = 1
    base_seed: int = 0
    n_initial: int = 1
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.length_scales, (int, float)):
            self.length_scales = [float(self.length_scales)]
        if isinstance(self.policies, str):
            self.policies = [self.policies]
        self.validate()

    def validate(self):
        if self.horizon < 1:
            raise InputError("horizon T must be >= 1")
        if self.n_trials < 1:
            raise InputError("n_trials must be >= 1")
        if self.n_initial < 0:
            raise InputError("n_initial |D0| must be >= 0")
        if self.designs_per_function < 1:
            raise InputError("designs_per_function must be >= 1")
        if self.noise_variance < 0:
            raise InputError("noise_variance must be >= 0")
        if self.fit_every < 0:
            raise InputError("fit_every must be >= 0")
        if self.objective == "tabular" and not self.tabular_path:
            raise InputError("tabular objective needs tabular_path")
        if not self.policies:
            raise InputError("at least one policy is required")
        for p in self.policies:
            if p not in POLICY_NAMES:
                raise InputError(f"unknown policy {p!r}; choose from {', '.join(POLICY_NAMES)}")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InputError(str(exc)) from None

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from None
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None
        if not isinstance(data, dict):
            raise InputError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self):
        return dataclasses.asdict(self)

    def config_hash(self):
        payload = {k: v for k, v in self.to_dict().items() if k not in ("out_dir", "workers")}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def kernel(self):
        ls = list(self.length_scales)
        if len(ls) == 1 and self.objective_dim() > 1:
            ls = ls * self.objective_dim()
        return KernelSpec(self.kernel_family, tuple(ls), self.output_scale)

    def objective_dim(self):
        if self.objective == "gp_sample":
            return self.dim
        if self.objective == "tabular":
            return None if self.tabular_path is None else _tabular_dim(self.tabular_path)
        from .objective import BENCHMARKS, benchmark_name

        return BENCHMARKS[benchmark_name(self.objective)][0]


def _tabular_dim(path):
    with open(path, newline="") as fh:
        return len(next(csv.reader(fh))) - 1


@dataclass
class TraceRow:
    t: int
    index: int
    x: tuple
    y: float
    zeta: float | None
    simple_regret: float
    cumulative_regret: float
    sigma: float
    f: float


@dataclass
class RegretTrace:
    """Per-iteration record of one trial of one policy."""

    policy: str
    trial: int
    seed: int
    config_hash: str
    true_max: float
    rows: list = field(default_factory=list)
    initial: list = field(default_factory=list)
    complete: bool = True
    error: str | None = None
    refits: int = 0
    kernel: KernelSpec | None = None

    @property
    def simple_regret(self):
        return np.array([r.simple_regret for r in self.rows])

    @property
    def cumulative_regret(self):
        return np.array([r.cumulative_regret for r in self.rows])

    @property
    def zetas(self):
        return np.array([np.nan if r.zeta is None else r.zeta for r in self.rows])

    @property
    def sigmas(self):
        return np.array([r.sigma for r in self.rows])

    @property
    def queried_points(self):
        return np.array([r.x for r in self.rows])

    def check_invariants(self):
        sr, cr = self.simple_regret, self.cumulative_regret
        if len(sr) == 0:
            return
        if np.any(sr < 0) or np.any(np.diff(sr) > 0):
            raise AssertionError(f"simple regret not nonnegative/nonincreasing in trial {self.trial}")
        if np.any(np.diff(cr) < 0):
            raise AssertionError(f"cumulative regret decreasing in trial {self.trial}")


def build_objective(config, trial_index):
    """Objective for a trial; trials share a function in blocks of ``designs_per_function``."""
    func_index = trial_index // config.designs_per_function
    if config.objective == "gp_sample":
        values = np.arange(config.grid_size) * config.grid_spacing
        grid = grid_candidates(values, config.dim)
        rng = rngs.stream(config.base_seed, "objective", func_index)
        return sample_gp_function(config.kernel(), grid, rng, config.noise_variance)
    if config.objective == "tabular":
        return load_tabular(config.tabular_path, config.noise_variance, config.normalize)
    return benchmark_objective(
        config.objective, config.pool_size, seed=config.base_seed * 1_000_003 + func_index,
        noise_variance=config.noise_variance, normalize=config.normalize,
    )


def domain_info(config, objective):
    """Continuous theory constants when ``a`` and ``b`` are given, else the finite candidate set."""
    if config.a is not None and config.b is not None:
        return DomainInfo.continuous(config.a, config.b, config.r, objective.dim)
    return DomainInfo.finite(len(objective.candidates), d=objective.dim)


def build_policy(name, config, objective):
    if name in ("ei", "ts"):
        return Policy(name, name=name)
    schedule = make_schedule(
        name, domain_info(config, objective), theta=config.theta, eta=config.eta,
        c=config.heuristic_c, dim=objective.dim,
    )
    return Policy("ucb", schedule, name=name)


def _standardize(ys):
    ys = np.asarray(ys, dtype=float)
    if len(ys) < 2 or ys.std() == 0:
        return ys - ys.mean() if len(ys) else ys
    return (ys - ys.mean()) / ys.std()


def run_trial(config, trial_index, policy=None, objective=None):
    """Run |D0| random observations then ``horizon`` policy iterations.

    Every draw comes from streams keyed by ``(base_seed, trial_index)`` (and
    the policy name for the noise and policy streams), so the result does not
    depend on which other trials or policies ran. Simple regret uses the
    noiseless values of all queried points including the initial design.
    """
    policy = policy or config.policies[0]
    if objective is None:
        objective = build_objective(config, trial_index)
    pol = build_policy(policy, config, objective)
    kernel = config.kernel()
    if kernel.dim != objective.dim:
        raise InputError(f"kernel has {kernel.dim} length scales, objective has dimension {objective.dim}")
    cands = objective.candidates.points
    fvals = objective.values
    f_star = objective.true_max
    sd = math.sqrt(config.noise_variance)
    # GP noise must be positive even for noiseless objectives
    gp_noise = config.noise_variance if config.noise_variance > 0 else 1e-10

    design_rng = rngs.stream(config.base_seed, "design", trial_index)
    noise_rng = rngs.stream(config.base_seed, "noise", trial_index, policy)
    policy_rng = rngs.stream(config.base_seed, "policy", trial_index, policy)

    trace = RegretTrace(policy, trial_index, config.base_seed, config.config_hash(), f_star, kernel=kernel)
    n0 = min(config.n_initial, len(cands))
    idx = list(design_rng.choice(len(cands), size=n0, replace=False)) if n0 else []
    ys = [float(fvals[i] + sd * design_rng.standard_normal()) if sd else float(fvals[i]) for i in idx]
    trace.initial = [(int(i), tuple(float(v) for v in cands[i]), y) for i, y in zip(idx, ys)]
    best_f = max((fvals[i] for i in idx), default=-math.inf)
    cum = 0.0
    try:
        for t in range(1, config.horizon + 1):
            y_fit = _standardize(ys) if config.standardize_y else ys
            if config.fit_every and (t - 1) % config.fit_every == 0 and len(idx) >= 2:
                kernel = optimize_hyperparameters(cands[idx], y_fit, gp_noise, kernel, budget=config.hyper_budget)
                trace.refits += 1
            post = fit_posterior(kernel, cands[idx], y_fit, gp_noise)
            j, zeta = select_next(pol, post, objective.candidates, t, policy_rng)
            _, var = predict_many(post, cands[j : j + 1])
            y = float(fvals[j] + sd * noise_rng.standard_normal()) if sd else float(fvals[j])
            idx.append(j)
            ys.append(y)
            best_f = max(best_f, fvals[j])
            cum += f_star - fvals[j]
            trace.rows.append(TraceRow(
                t, j, tuple(float(v) for v in cands[j]), y, zeta,
                float(f_star - best_f), float(cum), float(math.sqrt(var[0])), float(fvals[j]),
            ))
    except NumericalError as exc:
        log.warning("trial %d (%s) aborted at t=%d: %s", trial_index, policy, len(trace.rows) + 1, exc)
        trace.complete = False
        trace.error = str(exc)
    trace.kernel = kernel
    trace.check_invariants()
    return trace


@dataclass
class PolicyAggregate:
    policy: str
    iters: np.ndarray
    mean_sr: np.ndarray
    stderr_sr: np.ndarray
    mean_cr: np.ndarray
    mean_zeta: np.ndarray
    n_completed: int
    n_failed: int

    @property
    def bcr_estimate(self):
        return float(self.mean_cr[-1]) if len(self.mean_cr) else math.nan

    @property
    def bsr_estimate(self):
        return float(self.mean_sr[-1]) if len(self.mean_sr) else math.nan


def aggregate(policy, traces):
    """Mean/stderr of simple regret, mean cumulative regret and mean zeta per iteration."""
    done = sorted((tr for tr in traces if tr.complete), key=lambda tr: tr.trial)
    failed = len(traces) - len(done)
    if not done:
        empty = np.zeros(0)
        return PolicyAggregate(policy, empty, empty, empty, empty, empty, 0, failed)
    sr = np.stack([tr.simple_regret for tr in done])
    cr = np.stack([tr.cumulative_regret for tr in done])
    z = np.stack([tr.zetas for tr in done])
    n = len(done)
    stderr = sr.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(sr.shape[1])
    mean_z = np.full(z.shape[1], np.nan) if np.all(np.isnan(z)) else z.mean(axis=0)
    return PolicyAggregate(policy, np.arange(1, sr.shape[1] + 1), sr.mean(axis=0), stderr,
                           cr.mean(axis=0), mean_z, n, failed)


@dataclass
class Report:
    config: ExperimentConfig
    traces: dict
    aggregates: dict
    metadata: dict = field(default_factory=dict)

    def summary_lines(self):
        lines = []
        for name, agg in self.aggregates.items():
            note = f" ({agg.n_failed} failed trials excluded)" if agg.n_failed else ""
            lines.append(
                f"{name:<20s} trials={agg.n_completed:<4d} final mean SR={agg.bsr_estimate:.6g} "
                f"(se {agg.stderr_sr[-1] if agg.n_completed else math.nan:.3g})  BCR~{agg.bcr_estimate:.6g}{note}"
            )
        return lines


def _trial_task(args):
    config, trial_index = args
    objective = build_objective(config, trial_index)
    return trial_index, {p: run_trial(config, trial_index, p, objective) for p in config.policies}


def run_experiment(config, workers=None):
    """Run every policy on ``n_trials`` trials; trials with the same index share objective and D0."""
    workers = config.workers if workers is None else workers
    tasks = [(config, i) for i in range(config.n_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_trial_task, tasks))
    else:
        results = [_trial_task(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    traces = {p: [res[p] for _, res in results] for p in config.policies}
    aggregates = {p: aggregate(p, trs) for p, trs in traces.items()}
    first = build_objective(config, 0)
    meta = {
        "config_hash": config.config_hash(),
        "objective": config.objective,
        "n_candidates": len(first.candidates),
        "normalized_inputs": bool(first.metadata.get("normalized", False)),
        "completed": {p: a.n_completed for p, a in aggregates.items()},
        "failed": {p: a.n_failed for p, a in aggregates.items()},
    }
    return Report(config, traces, aggregates, meta)


def write_trace_csv(traces, path):
    """Trace rows in the ``trial,iter,x,y,zeta,simple_regret,cumulative_regret`` schema.

    ``x`` holds the candidate coordinates joined by spaces.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for tr in traces:
            for r in tr.rows:
                w.writerow([tr.trial, r.t, " ".join(fmt(v) for v in r.x), fmt(r.y), fmt(r.zeta),
                            fmt(r.simple_regret), fmt(r.cumulative_regret)])


def read_trace_csv(path):
    """Parse a trace CSV back into a list of dicts with float fields."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append({
                "trial": int(rec["trial"]),
                "iter": int(rec["iter"]),
                "x": tuple(float(v) for v in rec["x"].split()),
                "y": float(rec["y"]),
                "zeta": float(rec["zeta"]) if rec["zeta"] else None,
                "simple_regret": float(rec["simple_regret"]),
                "cumulative_regret": float(rec["cumulative_regret"]),
            })
    return out


def write_aggregate_csv(agg, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        for k in range(len(agg.iters)):
            w.writerow([int(agg.iters[k]), fmt(agg.mean_sr[k]), fmt(agg.stderr_sr[k]),
                        fmt(agg.mean_cr[k]), fmt(agg.mean_zeta[k])])


def export(report, out_dir=None, formats=("csv", "svg")):
    """Write traces, aggregates, plots and the resolved config into ``out_dir``.

    Returns the list of written paths.
    """
    out_dir = out_dir or report.config.out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror}") from exc
    written = []
    cfg_path = os.path.join(out_dir, "config.resolved.json")
    with open(cfg_path, "w") as fh:
        json.dump({**report.config.to_dict(), "_metadata": report.metadata}, fh, indent=2, sort_keys=True)
    written.append(cfg_path)
    if "csv" in formats:
        for p in report.config.policies:
            path = os.path.join(out_dir, f"trace_{p}.csv")
            write_trace_csv(report.traces[p], path)
            written.append(path)
            path = os.path.join(out_dir, f"aggregate_{p}.csv")
            write_aggregate_csv(report.aggregates[p], path)
            written.append(path)
    if "svg" in formats:
        aggs = [a for a in report.aggregates.values() if a.n_completed]
        series = {a.policy: (a.iters, a.mean_sr) for a in aggs}
        path = os.path.join(out_dir, "simple_regret.svg")
        with open(path, "w") as fh:
            fh.write(svg_line_plot(series, title="Mean simple regret", xlabel="iteration",
                                   ylabel="simple regret", log_y=True))
        written.append(path)
        zs = {a.policy: (a.iters, a.mean_zeta) for a in aggs if not np.all(np.isnan(a.mean_zeta))}
        if zs:
            path = os.path.join(out_dir, "confidence.svg")
            with open(path, "w") as fh:
                fh.write(svg_line_plot(zs, title="Mean confidence parameter", xlabel="iteration",
                                       ylabel="beta / zeta", log_y=False))
            written.append(path)
    return written
