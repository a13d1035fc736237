"""Confidence parameters for UCB-style acquisition.

Deterministic GP-UCB schedules (``beta_t``), randomized laws for ``zeta_t``
(Gamma, two-parameter exponential, truncated normal), their closed-form means
and moment generating functions at -1/2, and the samplers.

Conventions: a finite domain is described by its cardinality; a continuous
domain ``[0, r]^d`` by the regularity constants ``a, b`` of the sample-path
derivative tail bound plus ``r`` and ``d``. For continuous domains the
schedules use the per-dimension grid resolution

    tau_t = b d r t^2 (sqrt(log(a d)) + sqrt(pi) / 2)

and ``log|X_t| = d log tau_t``.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

from .errors import InputError

SQRT_2PI = math.sqrt(2.0 * math.pi)
IRGP_RATE = 0.5


class ClampWarning(RuntimeWarning):
    """A schedule formula went negative and was clamped to 0."""


def _clamp(value, what):
    if value < 0:
        warnings.warn(f"{what} = {value:.6g} < 0 clamped to 0", ClampWarning, stacklevel=3)
        return 0.0
    return value


class Variant(str, Enum):
    DETERMINISTIC_FINITE = "DeterministicFinite"
    DETERMINISTIC_CONTINUOUS = "DeterministicContinuous"
    GAMMA = "GammaSchedule"
    TWO_PARAM_EXP_FINITE = "TwoParamExpFinite"
    TWO_PARAM_EXP_CONTINUOUS = "TwoParamExpContinuous"
    TWO_PARAM_EXP_ACCURACY = "TwoParamExpAccuracy"
    TRUNC_NORMAL = "TruncNormalSchedule"
    FIXED_HEURISTIC = "FixedHeuristic"
    GAMMA_HEURISTIC = "GammaHeuristic"
    TWO_PARAM_EXP_HEURISTIC = "TwoParamExpHeuristic"

    @property
    def deterministic(self):
        return self in (Variant.DETERMINISTIC_FINITE, Variant.DETERMINISTIC_CONTINUOUS, Variant.FIXED_HEURISTIC)


@dataclass(frozen=True)
class DomainInfo:
    """Either ``DomainInfo.finite(n)`` or ``DomainInfo.continuous(a, b, r, d)``."""

    cardinality: int | None = None
    a: float | None = None
    b: float | None = None
    r: float | None = None
    d: int | None = None

    def __post_init__(self):
        if self.cardinality is not None:
            if int(self.cardinality) != self.cardinality or self.cardinality < 1:
                raise InputError(f"domain cardinality must be a positive integer, got {self.cardinality}")
        else:
            for name in ("a", "b", "r"):
                v = getattr(self, name)
                if v is None or not v > 0:
                    raise InputError(f"continuous domain needs {name} > 0, got {v}")
            if self.d is None or int(self.d) != self.d or self.d < 1:
                raise InputError(f"continuous domain needs integer d >= 1, got {self.d}")

    @classmethod
    def finite(cls, cardinality, d=None):
        return cls(cardinality=int(cardinality), d=d)

    @classmethod
    def continuous(cls, a, b, r, d):
        return cls(a=float(a), b=float(b), r=float(r), d=int(d))

    @property
    def is_finite(self):
        return self.cardinality is not None

    def log_size(self, t):
        """``log|X|`` for finite domains, ``log|X_t| = d log tau_t`` otherwise."""
        if self.is_finite:
            return math.log(self.cardinality)
        return self.d * math.log(discretization_tau(self, t))


def _check_t(t):
    if t < 1:
        raise InputError(f"iteration index t must be >= 1, got {t}")


def _lipschitz_factor(domain):
    # a*d < 1 makes log(a d) negative; the covering bound still holds with 0
    return math.sqrt(max(math.log(domain.a * domain.d), 0.0)) + math.sqrt(math.pi) / 2.0


def discretization_tau(domain, t):
    """Real-valued per-dimension division count ``tau_t`` for a continuous domain."""
    if domain.is_finite:
        raise InputError("discretization is defined for continuous domains only")
    _check_t(t)
    return domain.b * domain.d * domain.r * t * t * _lipschitz_factor(domain)


def discretization_size(domain, t):
    """``ceil(tau_t) ** d`` points in the equally divided grid at iteration ``t``."""
    return math.ceil(discretization_tau(domain, t)) ** domain.d


def beta_gpucb(domain, t):
    """Theoretical GP-UCB confidence parameter ``beta_t``."""
    _check_t(t)
    if domain.is_finite:
        beta = 2.0 * math.log(domain.cardinality * t * t / SQRT_2PI)
    else:
        beta = 2.0 * domain.d * math.log(discretization_tau(domain, t)) + 2.0 * math.log(t * t / SQRT_2PI)
    return _clamp(beta, "beta_t")


def irgpucb_params(domain, mode="finite", t=None, eta=None):
    """Shift ``s`` and rate ``lambda`` of the two-parameter exponential law.

    ``mode`` is one of ``"finite"`` (constant in t), ``"continuous"`` (needs
    ``t``) or ``"accuracy"`` (needs ``eta``; constant in t). ``lambda`` is
    always 1/2.
    """
    if mode == "finite":
        if not domain.is_finite:
            raise InputError("finite IRGP-UCB parameters need a finite domain")
        s = 2.0 * math.log(domain.cardinality / 2.0)
    elif mode == "continuous":
        if t is None:
            raise InputError("continuous IRGP-UCB parameters need t")
        s = 2.0 * domain.d * math.log(discretization_tau(domain, t)) - 2.0 * math.log(2.0)
    elif mode == "accuracy":
        if eta is None or not eta > 0:
            raise InputError(f"accuracy mode needs eta > 0, got {eta}")
        if domain.is_finite:
            raise InputError("accuracy-mode parameters need a continuous domain")
        tau = 2.0 * domain.b * domain.d * domain.r * _lipschitz_factor(domain) / eta
        s = 2.0 * domain.d * math.log(tau) - 2.0 * math.log(2.0)
    else:
        raise InputError(f"unknown IRGP-UCB mode {mode!r}")
    return _clamp(s, "s"), IRGP_RATE


def gamma_kappa(domain_size, t, theta):
    """Gamma shape ``kappa_t = log(|X| t^2) / log(1 + theta/2)``.

    ``domain_size`` may be a real number (``|X_t| = tau_t^d`` on continuous
    domains).
    """
    if domain_size < 1:
        raise InputError("domain_size must be >= 1")
    if not theta > 0:
        raise InputError("theta must be positive")
    _check_t(t)
    return (math.log(domain_size) + 2.0 * math.log(t)) / math.log1p(theta / 2.0)


@dataclass(frozen=True)
class ConfidenceSchedule:
    """A deterministic or randomized confidence-parameter generator.

    ``theta`` is the Gamma scale, ``eta`` the target accuracy for
    ``TwoParamExpAccuracy`` and ``c`` the constant of the heuristic variants.
    ``dim`` is the input dimension used by the heuristic variants; it defaults
    to ``domain.d``.
    """

    variant: Variant
    domain: DomainInfo
    theta: float = 1.0
    eta: float | None = None
    c: float = 0.2
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        v = self.variant
        if v in (Variant.DETERMINISTIC_FINITE, Variant.TWO_PARAM_EXP_FINITE) and not self.domain.is_finite:
            raise InputError(f"{v.value} needs a finite domain")
        if v in (Variant.DETERMINISTIC_CONTINUOUS, Variant.TWO_PARAM_EXP_CONTINUOUS, Variant.TWO_PARAM_EXP_ACCURACY):
            if self.domain.is_finite:
                raise InputError(f"{v.value} needs a continuous domain")
        if v is Variant.TWO_PARAM_EXP_ACCURACY and not (self.eta is not None and self.eta > 0):
            raise InputError("TwoParamExpAccuracy needs eta > 0")
        if not self.theta > 0:
            raise InputError("theta must be positive")
        if v in (Variant.FIXED_HEURISTIC, Variant.GAMMA_HEURISTIC, Variant.TWO_PARAM_EXP_HEURISTIC):
            if self.input_dim is None:
                raise InputError(f"{v.value} needs the input dimension")

    @property
    def input_dim(self):
        return self.dim if self.dim is not None else self.domain.d

    @property
    def deterministic(self):
        return self.variant.deterministic

    def law(self, t):
        """``(family, params)`` of zeta_t; family in {"point", "gamma", "exp2", "truncnorm"}."""
        _check_t(t)
        v, dom = self.variant, self.domain
        if v is Variant.DETERMINISTIC_FINITE or v is Variant.DETERMINISTIC_CONTINUOUS:
            return "point", (beta_gpucb(dom, t),)
        if v is Variant.FIXED_HEURISTIC:
            return "point", (self.c * self.input_dim * math.log(2.0 * t),)
        if v is Variant.GAMMA:
            size = dom.cardinality if dom.is_finite else math.exp(dom.log_size(t))
            return "gamma", (gamma_kappa(size, t, self.theta), self.theta)
        if v is Variant.GAMMA_HEURISTIC:
            return "gamma", (self.c * self.input_dim * math.log(2.0 * t), 1.0)
        if v is Variant.TWO_PARAM_EXP_FINITE:
            return "exp2", irgpucb_params(dom, "finite")
        if v is Variant.TWO_PARAM_EXP_CONTINUOUS:
            return "exp2", irgpucb_params(dom, "continuous", t=t)
        if v is Variant.TWO_PARAM_EXP_ACCURACY:
            return "exp2", irgpucb_params(dom, "accuracy", eta=self.eta)
        if v is Variant.TWO_PARAM_EXP_HEURISTIC:
            return "exp2", (self.input_dim / 2.0, IRGP_RATE)
        if v is Variant.TRUNC_NORMAL:
            return "truncnorm", (2.0 * (dom.log_size(t) + 2.0 * math.log(t)) + 1.0,)
        raise AssertionError(v)

    def value(self, t):
        """``beta_t`` for deterministic variants."""
        family, params = self.law(t)
        if family != "point":
            raise InputError(f"{self.variant.value} is randomized; use sample_zeta")
        return params[0]


def gamma_marsaglia_tsang(shape, scale, rng, size):
    """Gamma(shape, scale) draws by the Marsaglia-Tsang squeeze method.

    Shapes below 1 are boosted: draw with ``shape + 1`` and multiply by
    ``U ** (1 / shape)``.
    """
    if shape < 0 or not scale > 0:
        raise InputError(f"invalid Gamma parameters shape={shape}, scale={scale}")
    if shape == 0:
        return np.zeros(size)
    a = shape + 1.0 if shape < 1.0 else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    filled = 0
    while filled < size:
        n = max(int((size - filled) * 1.1) + 8, 16)
        x = rng.standard_normal(n)
        u = rng.random(n)
        v = (1.0 + c * x) ** 3
        ok = v > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            accept = ok & (
                (u < 1.0 - 0.0331 * x**4) | (np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(v)))
            )
        got = (d * v[accept])[: size - filled]
        out[filled : filled + len(got)] = got
        filled += len(got)
    if shape < 1.0:
        out *= rng.random(size) ** (1.0 / shape)
    return out * scale


def truncated_normal_unit(mean, rng, size):
    """N(mean, 1) truncated to [mean - 1, mean + 1], by rejection."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        z = rng.standard_normal(max(int((size - filled) * 1.5) + 8, 16))
        z = z[np.abs(z) <= 1.0][: size - filled]
        out[filled : filled + len(z)] = z
        filled += len(z)
    return mean + out


def sample_zeta(schedule, t, rng, size=None):
    """One confidence-parameter draw for iteration ``t`` (or ``size`` draws).

    Deterministic variants return ``beta_t`` without touching ``rng``.
    """
    family, params = schedule.law(t)
    n = 1 if size is None else int(size)
    if family == "point":
        out = np.full(n, params[0])
    elif family == "gamma":
        out = gamma_marsaglia_tsang(params[0], params[1], rng, n)
    elif family == "exp2":
        s, lam = params
        out = s + rng.standard_exponential(n) / lam
    else:
        out = truncated_normal_unit(params[0], rng, n)
    return float(out[0]) if size is None else out


def expected_zeta(schedule, t):
    family, params = schedule.law(t)
    if family == "point":
        raise InputError(f"{schedule.variant.value} is deterministic and has no distribution")
    if family == "gamma":
        return params[0] * params[1]
    if family == "exp2":
        return params[0] + 1.0 / params[1]
    return params[0]


def mgf_at_minus_half(schedule, t):
    """``E[exp(-zeta_t / 2)]`` in closed form."""
    family, params = schedule.law(t)
    if family == "point":
        raise InputError(f"{schedule.variant.value} is deterministic and has no distribution")
    if family == "gamma":
        kappa, theta = params
        return (1.0 + theta / 2.0) ** (-kappa)
    if family == "exp2":
        s, lam = params
        return lam / (lam + 0.5) * math.exp(-s / 2.0)
    m = params[0]
    ratio = (ndtr(1.5) - ndtr(-0.5)) / (ndtr(1.0) - ndtr(-1.0))
    return math.exp(-m / 2.0 + 1.0 / 8.0) * ratio


def variance_zeta(schedule, t):
    """Closed-form variance of zeta_t; used for Monte Carlo standard errors."""
    family, params = schedule.law(t)
    if family == "point":
        return 0.0
    if family == "gamma":
        return params[0] * params[1] ** 2
    if family == "exp2":
        return 1.0 / params[1] ** 2
    # Var of N(0,1) truncated to [-1, 1]: 1 - 2 phi(1) / (Phi(1) - Phi(-1))
    phi1 = math.exp(-0.5) / SQRT_2PI
    return 1.0 - 2.0 * phi1 / (ndtr(1.0) - ndtr(-1.0))


def mgf_variance(schedule, t):
    """``Var[exp(-zeta/2)] = M(-1) - M(-1/2)^2``, for Monte Carlo standard errors."""
    family, params = schedule.law(t)
    m_half = mgf_at_minus_half(schedule, t)
    if family == "gamma":
        kappa, theta = params
        m_one = (1.0 + theta) ** (-kappa)
    elif family == "exp2":
        s, lam = params
        m_one = lam / (lam + 1.0) * math.exp(-s)
    else:
        m = params[0]
        m_one = math.exp(-m + 0.5) * (ndtr(2.0) - ndtr(0.0)) / (ndtr(1.0) - ndtr(-1.0))
    return m_one - m_half**2


def make_schedule(name, domain, theta=1.0, eta=None, c=0.2, dim=None):
    """Build a schedule from a short policy-style name.

    Names: ``gp_ucb``, ``gp_ucb_heuristic``, ``rgp_ucb``, ``rgp_ucb_heuristic``,
    ``irgp_ucb``, ``irgp_ucb_accuracy``, ``irgp_ucb_heuristic``, ``tn_ucb``,
    or any :class:`Variant` value.
    """
    finite = domain.is_finite
    table = {
        "gp_ucb": Variant.DETERMINISTIC_FINITE if finite else Variant.DETERMINISTIC_CONTINUOUS,
        "gp_ucb_heuristic": Variant.FIXED_HEURISTIC,
        "rgp_ucb": Variant.GAMMA,
        "rgp_ucb_heuristic": Variant.GAMMA_HEURISTIC,
        "irgp_ucb": Variant.TWO_PARAM_EXP_FINITE if finite else Variant.TWO_PARAM_EXP_CONTINUOUS,
        "irgp_ucb_accuracy": Variant.TWO_PARAM_EXP_ACCURACY,
        "irgp_ucb_heuristic": Variant.TWO_PARAM_EXP_HEURISTIC,
        "tn_ucb": Variant.TRUNC_NORMAL,
    }
    try:
        variant = table[name] if name in table else Variant(name)
    except ValueError:
        raise InputError(f"unknown confidence schedule {name!r}") from None
    return ConfidenceSchedule(variant, domain, theta=theta, eta=eta, c=c, dim=dim)
