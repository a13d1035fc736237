"""Selection policies over finite candidate sets: (randomized) UCB, EI, and TS."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .confidence import ConfidenceSchedule, sample_zeta
from .errors import InputError
from .gp import predict_many, sample_joint

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class CandidateSet:
    """Finite set of points an acquisition argmax ranges over.

    ``provenance`` is ``"grid"`` for explicit grids and tabular rows, or
    ``"pool"`` for a scrambled Sobol sample of a box (``pool_seed`` set).
    """

    points: np.ndarray
    provenance: str = "grid"
    pool_seed: int | None = None
    lower: np.ndarray | None = field(default=None, repr=False)
    upper: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0 or len(pts) == 0:
            raise InputError("candidate set must be non-empty")
        if self.lower is not None and self.upper is not None:
            lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
            if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
                raise InputError("candidate points fall outside the declared box")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self):
        return self.points.shape[1]


def grid_candidates(values, dim):
    """Cartesian grid ``values ** dim`` (first coordinate varies slowest)."""
    values = np.asarray(values, dtype=float)
    mesh = np.meshgrid(*([values] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return CandidateSet(pts, "grid", lower=np.full(dim, values.min()), upper=np.full(dim, values.max()))


def sobol_pool(lower, upper, size, seed):
    """Scrambled Sobol pool of ``size`` points in the box [lower, upper]."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    sampler = qmc.Sobol(len(lower), scramble=True, seed=np.random.default_rng(seed))
    m = int(np.ceil(np.log2(max(size, 1))))
    unit = sampler.random_base2(m)[:size]
    pts = qmc.scale(unit, lower, upper)
    return CandidateSet(pts, "pool", pool_seed=int(seed), lower=lower, upper=upper)


@dataclass(frozen=True)
class Policy:
    """``kind`` is ``"ucb"`` (with a schedule), ``"ei"`` or ``"ts"``."""

    kind: str
    schedule: ConfidenceSchedule | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in ("ucb", "ei", "ts"):
            raise InputError(f"unknown policy kind {self.kind!r}")
        if (self.kind == "ucb") != (self.schedule is not None):
            raise InputError("a UCB policy carries exactly one schedule; EI and TS carry none")

    @property
    def label(self):
        return self.name or (self.schedule.variant.value if self.schedule else self.kind.upper())


def _points(candidates):
    return candidates.points if isinstance(candidates, CandidateSet) else np.atleast_2d(candidates)


def ucb_scores(posterior, candidates, zeta):
    """``mu(x) + sqrt(zeta) * sigma(x)`` for every candidate."""
    if zeta < 0:
        raise InputError(f"zeta must be non-negative, got {zeta}")
    mean, var = predict_many(posterior, _points(candidates))
    if zeta == 0:
        return mean
    return mean + np.sqrt(zeta) * np.sqrt(var)


def expected_improvement(mean, sd, incumbent):
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if incumbent == -np.inf:
        return np.full(mean.shape, np.inf)
    gain = mean - incumbent
    floor = np.maximum(gain, 0.0)
    pos = sd > 0
    out = floor.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        z = gain[pos] / sd[pos]
        ei = sd[pos] * (z * ndtr(z) + INV_SQRT_2PI * np.exp(-0.5 * z * z))
    # subnormal sd overflows z; the limit there is the floor
    ei = np.where(np.isfinite(ei), ei, 0.0)
    # analytically EI >= max(0, mu - incumbent); the clamp only removes rounding
    out[pos] = np.maximum(ei, floor[pos])
    return out


def ei_scores(posterior, candidates, incumbent):
    """Expected improvement over ``incumbent`` (the best observed y)."""
    mean, var = predict_many(posterior, _points(candidates))
    return expected_improvement(mean, np.sqrt(var), incumbent)


def select_next(policy, posterior, candidates, t, rng):
    """Pick the next candidate index; returns ``(index, zeta_used)``.

    UCB draws zeta once for this call; ties go to the lowest index.
    ``zeta_used`` is None for EI and TS.
    """
    if t < 1:
        raise InputError("t must be >= 1")
    pts = _points(candidates)
    if policy.kind == "ucb":
        zeta = sample_zeta(policy.schedule, t, rng)
        return int(np.argmax(ucb_scores(posterior, pts, zeta))), zeta
    if policy.kind == "ei":
        incumbent = float(np.max(posterior.y_train)) if posterior.n_train else -np.inf
        return int(np.argmax(ei_scores(posterior, pts, incumbent))), None
    draw = sample_joint(posterior, pts, 1, rng)[0]
    return int(np.argmax(draw)), None
