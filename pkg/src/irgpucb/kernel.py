"""Stationary covariance functions with ARD length scales."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError

JITTER = 1e-10


class Family(str, Enum):
    SQUARED_EXPONENTIAL = "SquaredExponential"
    MATERN52 = "Matern52"

    @classmethod
    def parse(cls, name):
        aliases = {
            "squaredexponential": cls.SQUARED_EXPONENTIAL,
            "se": cls.SQUARED_EXPONENTIAL,
            "rbf": cls.SQUARED_EXPONENTIAL,
            "gaussian": cls.SQUARED_EXPONENTIAL,
            "matern52": cls.MATERN52,
        }
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        if key not in aliases:
            raise InputError(f"unknown kernel family {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    ``length_scales`` holds one entry per input dimension. ``output_scale`` is
    the prior variance k(x, x); every reproduction config keeps it at 1.
    """

    family: Family = Family.SQUARED_EXPONENTIAL
    length_scales: tuple = (0.1,)
    output_scale: float = 1.0
    _ls: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if ls.ndim != 1 or ls.size == 0:
            raise InputError("length_scales must be a non-empty vector")
        if not np.all(np.isfinite(ls)) or np.any(ls <= 0):
            raise InputError(f"length_scales must be positive, got {ls.tolist()}")
        if not self.output_scale > 0:
            raise InputError("output_scale must be positive")
        object.__setattr__(self, "length_scales", tuple(float(v) for v in ls))
        object.__setattr__(self, "output_scale", float(self.output_scale))
        ls.setflags(write=False)
        object.__setattr__(self, "_ls", ls)

    @property
    def dim(self):
        return len(self.length_scales)

    @classmethod
    def isotropic(cls, length_scale, dim, family=Family.SQUARED_EXPONENTIAL, output_scale=1.0):
        return cls(family, (float(length_scale),) * dim, output_scale)

    def with_length_scales(self, length_scales):
        return KernelSpec(self.family, tuple(length_scales), self.output_scale)

    def to_dict(self):
        return {
            "family": self.family.value,
            "length_scales": list(self.length_scales),
            "output_scale": self.output_scale,
        }


def _as_points(spec, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, spec.dim) if X.size else X.reshape(0, spec.dim)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise InputError(f"points have dimension {X.shape[-1]}, kernel expects {spec.dim}")
    return X


def _scaled_sqdist(spec, X1, X2):
    return cdist(X1 / spec._ls, X2 / spec._ls, "sqeuclidean")


def _from_sqdist(spec, d2):
    if spec.family is Family.SQUARED_EXPONENTIAL:
        return spec.output_scale * np.exp(-0.5 * d2)
    r = np.sqrt(5.0 * d2)
    return spec.output_scale * (1.0 + r + r * r / 3.0) * np.exp(-r)


def eval_kernel(spec, x, x2):
    """Covariance k(x, x2) between two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x.shape != (spec.dim,) or x2.shape != (spec.dim,):
        raise InputError(f"expected points of dimension {spec.dim}, got {x.shape} and {x2.shape}")
    diff = (x - x2) / spec._ls
    return float(_from_sqdist(spec, np.dot(diff, diff)))


def cross_kernel(spec, X1, X2):
    """Matrix of k(X1[i], X2[j])."""
    X1 = _as_points(spec, X1)
    X2 = _as_points(spec, X2)
    if len(X1) == 0 or len(X2) == 0:
        return np.zeros((len(X1), len(X2)))
    return _from_sqdist(spec, _scaled_sqdist(spec, X1, X2))


def gram_matrix(spec, X):
    """Symmetric Gram matrix of ``X`` with the diagonal pinned to ``output_scale``."""
    X = _as_points(spec, X)
    K = cross_kernel(spec, X, X)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, spec.output_scale)
    return K


def prior_variance(spec, X):
    return np.full(len(_as_points(spec, X)), spec.output_scale)
