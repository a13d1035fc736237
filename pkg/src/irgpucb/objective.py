"""Black-box objectives: GP sample paths on grids, analytic benchmarks, and tabular data.

Every objective is exposed over a finite candidate set with its noiseless
values precomputed, so ``true_max`` and simple regret are always exact.
Benchmarks are negated so that everything is maximized.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .acquisition import CandidateSet, sobol_pool
from .errors import InputError
from .gp import stable_cholesky
from .kernel import gram_matrix

BENCHMARKS = {
    # name: (dim, lower, upper, known maximum of the negated function)
    "holder_table": (2, -10.0, 10.0, 19.2085),
    "cross_in_tray": (2, -10.0, 10.0, 2.06261),
    "ackley": (4, -32.768, 32.768, 0.0),
}
_BENCHMARK_ALIASES = {
    "holdertable": "holder_table",
    "crossintray": "cross_in_tray",
    "ackley": "ackley",
}


def benchmark_name(name):
    key = str(name).replace("_", "").replace("-", "").replace(" ", "").lower()
    if key not in _BENCHMARK_ALIASES:
        raise InputError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    return _BENCHMARK_ALIASES[key]


def _holder_table(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.abs(np.sin(x1) * np.cos(x2) * np.exp(np.abs(1.0 - np.hypot(x1, x2) / np.pi)))


def _cross_in_tray(x):
    x1, x2 = x[..., 0], x[..., 1]
    inner = np.abs(np.sin(x1) * np.sin(x2) * np.exp(np.abs(100.0 - np.hypot(x1, x2) / np.pi)))
    return 1e-4 * (inner + 1.0) ** 0.1


def _ackley(x):
    d = x.shape[-1]
    a, b, c = 20.0, 0.2, 2.0 * np.pi
    term1 = -a * np.exp(-b * np.sqrt(np.sum(x * x, axis=-1) / d))
    term2 = -np.exp(np.sum(np.cos(c * x), axis=-1) / d)
    # grouped so the origin evaluates to exactly 0
    return -((term1 + a) + (term2 + math.e))


_FUNCS = {"holder_table": _holder_table, "cross_in_tray": _cross_in_tray, "ackley": _ackley}


def eval_benchmark(name, x):
    """Negated standard test function (to be maximized) at ``x`` (or rows of ``x``)."""
    name = benchmark_name(name)
    dim, lo, hi, _ = BENCHMARKS[name]
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise InputError(f"{name} takes {dim}-dimensional input, got shape {x.shape}")
    if np.any(x < lo) or np.any(x > hi):
        raise InputError(f"{name} input outside [{lo}, {hi}]^{dim}")
    out = _FUNCS[name](x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Objective:
    """A finite black-box problem.

    ``candidates`` holds the model-space inputs (normalized when requested),
    ``raw_points`` the original coordinates, and ``values`` the noiseless
    function values per candidate.
    """

    kind: str
    candidates: CandidateSet
    values: np.ndarray
    noise_variance: float = 0.0
    name: str = ""
    raw_points: np.ndarray | None = None
    columns: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("gp_sample", "benchmark", "tabular"):
            raise InputError(f"unknown objective kind {self.kind!r}")
        if self.noise_variance < 0:
            raise InputError("noise_variance must be >= 0")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.candidates),):
            raise InputError("need exactly one value per candidate")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.raw_points is None:
            object.__setattr__(self, "raw_points", self.candidates.points)

    @property
    def true_max(self):
        return float(self.values.max())

    @property
    def argmax(self):
        return int(np.argmax(self.values))

    @property
    def dim(self):
        return self.candidates.dim

    def with_noise(self, noise_variance):
        return Objective(
            self.kind, self.candidates, self.values, noise_variance, self.name,
            self.raw_points, self.columns, dict(self.metadata),
        )


def sample_gp_function(kernel, grid, rng, noise_variance=0.0):
    """One exact draw of f ~ GP(0, k) over the grid points."""
    cands = grid if isinstance(grid, CandidateSet) else CandidateSet(grid, "grid")
    L, _ = stable_cholesky(gram_matrix(kernel, cands.points))
    values = L @ rng.standard_normal(len(cands))
    return Objective("gp_sample", cands, values, noise_variance, "gp_sample",
                     metadata={"kernel": kernel.to_dict()})


def benchmark_objective(name, pool_size, seed, noise_variance=0.0, normalize=True):
    """Benchmark restricted to a scrambled Sobol pool of its standard box."""
    name = benchmark_name(name)
    dim, lo, hi, known = BENCHMARKS[name]
    lower, upper = np.full(dim, lo), np.full(dim, hi)
    unit = sobol_pool(np.zeros(dim), np.ones(dim), pool_size, seed)
    raw = np.clip(lower + unit.points * (upper - lower), lo, hi)
    values = eval_benchmark(name, raw)
    cands = unit if normalize else CandidateSet(raw, "pool", pool_seed=int(seed), lower=lower, upper=upper)
    meta = {"global_max": known, "normalized": bool(normalize), "box": [lo, hi]}
    return Objective("benchmark", cands, values, noise_variance, name, raw, metadata=meta)


def _minmax(points):
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    span[span == 0] = 1.0
    return (points - lo) / span


def load_tabular(path, noise_variance=0.0, normalize=True):
    """Read a CSV with a header, ``d`` feature columns, then one target column."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if len(header) < 2:
            raise InputError(f"{path}: need at least one feature column and one target column")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise InputError(f"{path}: row {lineno} has {len(rec)} fields, header has {len(header)}")
            try:
                nums = [float(c) for c in rec]
            except ValueError:
                raise InputError(f"{path}: row {lineno} has a non-numeric cell: {rec}") from None
            if math.isnan(nums[-1]):
                raise InputError(f"{path}: row {lineno} has a NaN target")
            if not all(math.isfinite(v) for v in nums[:-1]):
                raise InputError(f"{path}: row {lineno} has a non-finite feature")
            rows.append((lineno, nums))
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 data rows, found {len(rows)}")
    seen = {}
    for lineno, nums in rows:
        key = tuple(nums[:-1])
        if key in seen and seen[key][1] != nums[-1]:
            raise InputError(
                f"{path}: rows {seen[key][0]} and {lineno} share features but have different targets"
            )
        seen.setdefault(key, (lineno, nums[-1]))
    data = np.array([nums for _, nums in rows], dtype=float)
    raw, values = data[:, :-1], data[:, -1]
    pts = _minmax(raw) if normalize else raw
    meta = {"normalized": bool(normalize), "path": str(path)}
    return Objective("tabular", CandidateSet(pts, "grid"), values, noise_variance, str(path),
                     raw, tuple(header), meta)


def export_tabular(objective, path):
    """Write raw features and noiseless values back out in the ``load_tabular`` format."""
    cols = objective.columns or tuple(f"x{j}" for j in range(objective.dim)) + ("y",)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for x, y in zip(objective.raw_points, objective.values):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def candidate_index(objective, x):
    """Resolve a candidate id or a point in candidate coordinates to an index."""
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < len(objective.candidates):
            raise InputError(f"unknown candidate id {x}")
        return int(x)
    x = np.asarray(x, dtype=float)
    hits = np.flatnonzero(np.all(objective.candidates.points == x, axis=1))
    if len(hits) == 0:
        raise InputError(f"point {x.tolist()} is not a candidate of this objective")
    return int(hits[0])


def noiseless(objective, x):
    if objective.kind == "benchmark" and not isinstance(x, (int, np.integer)):
        x = np.asarray(x, dtype=float)
        hits = np.flatnonzero(np.all(objective.candidates.points == x, axis=1))
        if len(hits):
            return float(objective.values[hits[0]])
        if objective.metadata.get("normalized"):
            lo, hi = objective.metadata["box"]
            x = lo + x * (hi - lo)
        return eval_benchmark(objective.name, x)
    return float(objective.values[candidate_index(objective, x)])


def observe(objective, x, rng):
    """Noisy observation ``f(x) + eps`` with eps ~ N(0, noise_variance), fresh per call."""
    value = noiseless(objective, x)
    if objective.noise_variance == 0:
        return value
    return value + math.sqrt(objective.noise_variance) * float(rng.standard_normal())
