"""Exact GP regression: posterior fitting, prediction, evidence, and joint sampling."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .errors import InputError, NumericalError
from .kernel import JITTER, KernelSpec, _as_points, cross_kernel, gram_matrix

MAX_JITTER = 1e-6
LENGTH_SCALE_BOUNDS = (1e-3, 1e3)


def stable_cholesky(A, jitter=JITTER, max_jitter=MAX_JITTER):
    """Lower Cholesky factor of ``A``, escalating diagonal jitter by 10x on failure.

    Returns ``(L, jitter_used)``. Raises :class:`NumericalError` carrying the
    condition estimate once ``max_jitter`` has been tried.
    """
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    eye = np.eye(n)
    current = jitter
    while True:
        try:
            return cholesky(A + current * eye, lower=True, check_finite=False), current
        except LinAlgError:
            pass
        if current >= max_jitter:
            break
        current = JITTER if current == 0 else min(current * 10.0, max_jitter)
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(A)) if np.all(np.isfinite(A)) else math.inf
    raise NumericalError(
        f"Cholesky failed for {n}x{n} matrix after jitter {max_jitter:g} (cond ~ {cond:.3e})",
        condition=cond,
    )


@dataclass(frozen=True)
class Posterior:
    """Fitted GP state conditioned on ``(X_train, y_train)``.

    ``chol`` is the lower factor of ``K + noise_variance * I`` and ``alpha``
    solves ``(K + noise_variance * I) alpha = y``.
    """

    kernel: KernelSpec
    X_train: np.ndarray
    y_train: np.ndarray
    noise_variance: float
    chol: np.ndarray
    alpha: np.ndarray

    @property
    def n_train(self):
        return len(self.y_train)


def _check_data(kernel, X, y, noise_variance):
    X = _as_points(kernel, X)
    y = np.asarray(y, dtype=float).ravel()
    if len(X) != len(y):
        raise InputError(f"{len(X)} inputs but {len(y)} targets")
    if not noise_variance > 0:
        raise InputError("noise_variance must be positive")
    return X, y


def fit_posterior(kernel, X, y, noise_variance):
    X, y = _check_data(kernel, X, y, noise_variance)
    A = gram_matrix(kernel, X) + noise_variance * np.eye(len(X))
    L, _ = stable_cholesky(A, jitter=0.0)
    alpha = cho_solve((L, True), y, check_finite=False) if len(y) else np.zeros(0)
    for arr in (X, y, L, alpha):
        arr.setflags(write=False)
    return Posterior(kernel, X, y, float(noise_variance), L, alpha)


def predict_many(posterior, X):
    """Posterior means and variances at each row of ``X``."""
    kern = posterior.kernel
    X = _as_points(kern, X)
    prior_var = np.full(len(X), kern.output_scale)
    if posterior.n_train == 0:
        return np.zeros(len(X)), prior_var
    Ks = cross_kernel(kern, posterior.X_train, X)
    mean = Ks.T @ posterior.alpha
    V = solve_triangular(posterior.chol, Ks, lower=True, check_finite=False)
    var = prior_var - np.einsum("ij,ij->j", V, V)
    return mean, np.maximum(var, 0.0)


def predict(posterior, x):
    """Posterior ``(mean, variance)`` at one point; variance is clamped at 0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (posterior.kernel.dim,):
        raise InputError(f"query has shape {x.shape}, kernel expects ({posterior.kernel.dim},)")
    mean, var = predict_many(posterior, x[None, :])
    return float(mean[0]), float(var[0])


def posterior_covariance(posterior, X):
    kern = posterior.kernel
    X = _as_points(kern, X)
    K = gram_matrix(kern, X)
    if posterior.n_train == 0:
        return K
    Ks = cross_kernel(kern, posterior.X_train, X)
    V = solve_triangular(posterior.chol, Ks, lower=True, check_finite=False)
    C = K - V.T @ V
    return 0.5 * (C + C.T)


def log_marginal_likelihood(kernel, X, y, noise_variance):
    """Log evidence ``log N(y | 0, K + noise_variance * I)``."""
    X, y = _check_data(kernel, X, y, noise_variance)
    if len(y) == 0:
        return 0.0
    A = gram_matrix(kernel, X) + noise_variance * np.eye(len(X))
    L, _ = stable_cholesky(A, jitter=0.0)
    z = solve_triangular(L, y, lower=True, check_finite=False)
    return float(-0.5 * z @ z - np.log(np.diag(L)).sum() - 0.5 * len(y) * math.log(2 * math.pi))


def _golden_section(fun, lo, hi, tol, max_evals):
    """Maximize a unimodal-ish ``fun`` on [lo, hi]; returns (x, f(x), n_evals)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    n = 2
    while b - a > tol and n < max_evals:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def optimize_hyperparameters(
    X, y, noise_variance, init, budget=300, n_starts=5, step=3.0, tol=0.02
):
    """Maximize the log evidence over log length scales by coordinate descent.

    Each of ``n_starts`` starting points (``init`` plus isotropic starts on a
    log grid) runs golden-section line searches along one log length scale at
    a time, within ``step`` of the current value. ``budget`` caps the total
    number of evidence evaluations. The noise variance and output scale are
    held fixed. The result never has lower evidence than ``init``; if no
    candidate can be evaluated, ``init`` is returned and a ``RuntimeWarning``
    is raised.
    """
    X = _as_points(init, X)
    y = np.asarray(y, dtype=float).ravel()
    if budget <= 0:
        return init
    if len(y) < 2:
        raise InputError("need at least two observations to fit hyperparameters")
    lo, hi = (math.log(b) for b in LENGTH_SCALE_BOUNDS)
    evals = 0

    def evidence(log_ls):
        nonlocal evals
        evals += 1
        try:
            return log_marginal_likelihood(init.with_length_scales(np.exp(log_ls)), X, y, noise_variance)
        except NumericalError:
            return -math.inf

    init_log = np.clip(np.log(init.length_scales), lo, hi)
    best_log = np.log(np.asarray(init.length_scales))
    best_val = evidence(best_log)
    starts = [init_log] + [
        np.full(init.dim, v) for v in np.linspace(math.log(0.03), math.log(3.0), max(n_starts - 1, 0))
    ]
    for start in starts:
        cur = start.copy()
        cur_val = evidence(cur)
        while evals < budget:
            before = cur_val
            for j in range(init.dim):
                if evals >= budget:
                    break

                def line(v, j=j):
                    trial = cur.copy()
                    trial[j] = v
                    return evidence(trial)

                a, b = max(lo, cur[j] - step), min(hi, cur[j] + step)
                v, fv, _ = _golden_section(line, a, b, tol, budget - evals)
                if fv > cur_val:
                    cur[j], cur_val = v, fv
            if cur_val - before < 1e-6:
                break
        if cur_val > best_val:
            best_log, best_val = cur.copy(), cur_val
        if evals >= budget:
            break
    if not math.isfinite(best_val):
        warnings.warn("hyperparameter search failed: no candidate passed Cholesky", RuntimeWarning)
        return init
    return init.with_length_scales(np.exp(best_log))


def sample_joint(posterior, X_cand, n_draws, rng):
    """``n_draws`` exact joint posterior draws of f over ``X_cand``, one per row."""
    X_cand = _as_points(posterior.kernel, X_cand)
    if len(X_cand) == 0:
        raise InputError("candidate set is empty")
    if n_draws == 0:
        return np.zeros((0, len(X_cand)))
    mean, _ = predict_many(posterior, X_cand)
    L, _ = stable_cholesky(posterior_covariance(posterior, X_cand))
    Z = rng.standard_normal((n_draws, len(X_cand)))
    return mean[None, :] + Z @ L.T
