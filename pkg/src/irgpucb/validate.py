"""Monte Carlo and analytic checks of the regret-analysis ingredients.

Every check returns a :class:`CheckReport`. Monte Carlo checks of one-sided
inequalities only fail when the violation exceeds the stated number of
standard errors; analytic checks use a fixed numerical slack.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import ndtr
from scipy.stats import ks_2samp

from . import rng as rngs
from .acquisition import grid_candidates
from .confidence import (
    ConfidenceSchedule,
    DomainInfo,
    Variant,
    expected_zeta,
    gamma_kappa,
    irgpucb_params,
    mgf_at_minus_half,
    mgf_variance,
    sample_zeta,
    variance_zeta,
)
from .errors import InputError
from .gp import fit_posterior, predict_many, stable_cholesky
from .kernel import KernelSpec, _as_points, cross_kernel, gram_matrix

SQRT_2PI = math.sqrt(2.0 * math.pi)
SUITES = ("coverage", "maxbound", "mgf", "infogain", "tails", "samplers")


@dataclass
class CheckReport:
    name: str
    passed: bool
    statistic: float
    threshold: float
    stderr: float = 0.0
    n_samples: int = 0
    seed: int | None = None
    detail: str = ""
    extra: dict = field(default_factory=dict, repr=False)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.name:<44s} stat={self.statistic:<14.8g} thr={self.threshold:<14.8g} "
                f"se={self.stderr:<10.4g} n={self.n_samples:<8d} seed={self.seed}  {self.detail}")


def c1_constant(noise_variance):
    """``C1 = 2 / log(1 + 1/noise_variance)``."""
    return 2.0 / math.log1p(1.0 / noise_variance)


def _prior_draws(kernel, grid, n, rng):
    L, _ = stable_cholesky(gram_matrix(kernel, grid))
    return rng.standard_normal((n, len(grid))) @ L.T


def _fixed_design_posterior(kernel, grid, obs_idx, noise_variance):
    """Linear map from observations to posterior mean, and posterior sd, for a fixed design."""
    K = gram_matrix(kernel, grid)
    if len(obs_idx) == 0:
        return np.zeros((len(grid), 0)), np.sqrt(np.diag(K))
    Koo = K[np.ix_(obs_idx, obs_idx)] + noise_variance * np.eye(len(obs_idx))
    L, _ = stable_cholesky(Koo, jitter=0.0)
    Kxo = K[:, obs_idx]
    A = cho_solve((L, True), Kxo.T).T
    var = np.diag(K) - np.einsum("ij,ij->i", A, Kxo)
    return A, np.sqrt(np.maximum(var, 0.0))


def _mc_stream(seed, name):
    return rngs.stream(seed, "validate", name)


def check_ucb_coverage(kernel, grid, n_obs, delta, n_mc, seed, noise_variance=1e-4):
    """Frequency with which some grid point exceeds ``mu + sqrt(beta_delta) sigma``.

    ``beta_delta = 2 log(|X| / (2 delta))``. Observation locations are drawn once
    and kept fixed across the ``n_mc`` prior draws.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    grid = _as_points(kernel, grid)
    n = len(grid)
    rng = _mc_stream(seed, "coverage")
    obs = rng.choice(n, size=min(n_obs, n), replace=False)
    beta = 2.0 * math.log(n / (2.0 * delta))
    A, sd = _fixed_design_posterior(kernel, grid, obs, noise_variance)
    F = _prior_draws(kernel, grid, n_mc, rng)
    Y = F[:, obs] + math.sqrt(noise_variance) * rng.standard_normal((n_mc, len(obs)))
    mu = Y @ A.T
    violated = np.any(F > mu + math.sqrt(max(beta, 0.0)) * sd[None, :], axis=1)
    freq = float(violated.mean())
    se = math.sqrt(delta * (1 - delta) / n_mc)
    thr = delta + 3.0 * se
    return CheckReport(f"ucb_coverage(delta={delta:g},n_obs={n_obs})", freq <= thr, freq, thr, se, n_mc, seed,
                       f"|X|={n} beta={beta:.4f}")


def check_max_bound(kernel, grid, n_obs, n_mc, seed, noise_variance=1e-4):
    """Compare E[max f] with E[max mu + sqrt(zeta) sigma], zeta ~ s + Exp(1/2), s = 2 log(|X|/2).

    Passes iff the mean gap is above -3 pooled standard errors.
    """
    grid = _as_points(kernel, grid)
    n = len(grid)
    if n < 3:
        raise InputError("need |X| >= 3")
    rng = _mc_stream(seed, "maxbound")
    obs = rng.choice(n, size=min(n_obs, n), replace=False)
    A, sd = _fixed_design_posterior(kernel, grid, obs, noise_variance)
    F = _prior_draws(kernel, grid, n_mc, rng)
    Y = F[:, obs] + math.sqrt(noise_variance) * rng.standard_normal((n_mc, len(obs)))
    mu = Y @ A.T
    sched = ConfidenceSchedule(Variant.TWO_PARAM_EXP_FINITE, DomainInfo.finite(n))
    zeta = sample_zeta(sched, 1, rng, size=n_mc)
    max_ucb = np.max(mu + np.sqrt(zeta)[:, None] * sd[None, :], axis=1)
    max_f = F.max(axis=1)
    gap = float(max_ucb.mean() - max_f.mean())
    se = math.sqrt(max_ucb.var(ddof=1) / n_mc + max_f.var(ddof=1) / n_mc)
    thr = -3.0 * se
    return CheckReport(f"max_bound(n_obs={n_obs})", gap >= thr, gap, thr, se, n_mc, seed,
                       f"E[max UCB]={max_ucb.mean():.4f} E[max f]={max_f.mean():.4f}",
                       extra={"mean_max_ucb": float(max_ucb.mean()), "mean_max_f": float(max_f.mean())})


def check_mgf_condition(domain_size, theta, t_max, slack=1e-12):
    """``M_t(-1/2) <= 1 / (|X| t^2)`` for the Gamma and two-parameter exponential schedules.

    Gamma uses ``kappa_t`` from :func:`gamma_kappa`; the exponential law uses
    ``s_t = 2 log(|X| t^2)`` with rate 1/2. The statistic is the largest
    ``M - bound`` over all t; ``extra["max_gap_to_equality"]`` records how far
    the Gamma schedule is from saturating the bound.
    """
    if not theta > 0:
        raise InputError("theta must be positive")
    worst = -math.inf
    saturation = 0.0
    for t in range(1, t_max + 1):
        bound = 1.0 / (domain_size * t * t)
        m_gamma = (1.0 + theta / 2.0) ** (-gamma_kappa(domain_size, t, theta))
        s = 2.0 * math.log(domain_size * t * t)
        m_exp_shift = math.exp(-s / 2.0)
        m_exp = 0.5 / (0.5 + 0.5) * m_exp_shift
        worst = max(worst, m_gamma - bound, m_exp_shift - bound, m_exp - bound)
        saturation = max(saturation, abs(m_gamma - bound))
    return CheckReport(f"mgf_condition(|X|={domain_size},theta={theta:g})", worst <= slack, worst, slack,
                       0.0, t_max, None, f"max|M_gamma - bound|={saturation:.3g}",
                       extra={"max_gap_to_equality": saturation})


def information_gain(K, noise_variance):
    """``0.5 log det(I + K / noise_variance)`` via a Cholesky log-determinant."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.size == 0:
        return 0.0
    L, _ = stable_cholesky(np.eye(len(K)) + K / noise_variance, jitter=0.0)
    return float(np.log(np.diag(L)).sum())


def greedy_gains(kernel, grid, T, noise_variance):
    """Greedy maximum-variance selection; returns (indices, cumulative information gains).

    The information gain of the first ``k`` selected points is
    ``sum_{i<=k} 0.5 log(1 + var_{i-1}(x_i) / noise_variance)``.
    """
    grid = _as_points(kernel, grid)
    n = len(grid)
    if T > n:
        raise InputError(f"T={T} exceeds grid size {n}")
    K = gram_matrix(kernel, grid)
    var = np.diag(K).copy()
    rows = np.zeros((T, n))
    picked, gains = [], np.zeros(T)
    total = 0.0
    for k in range(T):
        j = int(np.argmax(var))
        vj = max(var[j], 0.0)
        total += 0.5 * math.log1p(vj / noise_variance)
        v = (K[j] - rows[:k, j] @ rows[:k]) / math.sqrt(vj + noise_variance)
        rows[k] = v
        var = var - v * v
        picked.append(j)
        gains[k] = total
    return picked, gains


def greedy_mig(kernel, grid, T, noise_variance):
    """Greedy lower bound on the maximum information gain of ``T`` points."""
    if T == 0:
        return 0.0
    picked, gains = greedy_gains(kernel, grid, T, noise_variance)
    return float(gains[-1])


def exhaustive_mig(kernel, grid, T, noise_variance):
    """Exact maximum information gain by enumerating all ``T``-subsets (tiny grids only)."""
    from itertools import combinations

    grid = _as_points(kernel, grid)
    K = gram_matrix(kernel, grid)
    return max(information_gain(K[np.ix_(c, c)], noise_variance) for c in combinations(range(len(grid)), T))


def _replay_sigmas(trace, kernel, noise_variance):
    X = [np.asarray(x) for _, x, _ in trace.initial]
    out = []
    for row in trace.rows:
        post = fit_posterior(kernel, np.array(X).reshape(-1, kernel.dim), np.zeros(len(X)), noise_variance)
        _, var = predict_many(post, np.asarray(row.x)[None, :])
        out.append(math.sqrt(var[0]))
        X.append(np.asarray(row.x))
    return np.array(out)


def check_info_gain_bound(trace, kernel, noise_variance):
    """``sum_t sigma_{t-1}^2(x_t) <= C1 * 0.5 log det(I + K_T / noise_variance)``.

    Uses the posterior sd recorded in the trace when the kernel stayed fixed,
    otherwise replays the sds under ``kernel``.
    """
    if trace.refits:
        sig = _replay_sigmas(trace, kernel, noise_variance)
    else:
        sig = trace.sigmas
    X = trace.queried_points
    lhs = float(np.sum(sig**2))
    c1 = c1_constant(noise_variance)
    ig = information_gain(gram_matrix(kernel, X), noise_variance) if len(X) else 0.0
    rhs = c1 * ig + 1e-8
    return CheckReport(f"info_gain_bound({trace.policy},trial={trace.trial})", lhs <= rhs, lhs, rhs, 0.0,
                       len(X), trace.seed, f"C1={c1:.5f} I={ig:.5f}")


def check_tail_bounds(c_values=None, pairs=None, n_mc=10**6, seed=0):
    """Gaussian survival bound on a grid of c, and the positive-part expectation bound by Monte Carlo.

    Returns one report per family of checks.
    """
    c_values = np.linspace(0.01, 5.0, 100) if c_values is None else np.asarray(c_values, dtype=float)
    if np.any(c_values <= 0):
        raise InputError("c values must be positive")
    surv = ndtr(-c_values)
    bound = 0.5 * np.exp(-0.5 * c_values**2)
    gap = float(np.max(surv - bound))
    reports = [CheckReport("gauss_tail(1-Phi(c) <= exp(-c^2/2)/2)", gap <= 0.0, gap, 0.0, 0.0, len(c_values),
                           None, f"c in [{c_values.min():g}, {c_values.max():g}]")]
    if pairs is None:
        pairs = [(m, s) for m in (0.0, -0.5, -1.5) for s in (0.5, 1.0, 2.0)]
    rng = _mc_stream(seed, "tails")
    worst_z = -math.inf
    worst_exact = -math.inf
    for m, s in pairs:
        if m > 0 or not s > 0:
            raise InputError("pairs need m <= 0 and s > 0")
        zp = np.maximum(m + s * rng.standard_normal(n_mc), 0.0)
        est, se = float(zp.mean()), float(zp.std(ddof=1) / math.sqrt(n_mc))
        b = s / SQRT_2PI * math.exp(-m * m / (2 * s * s))
        exact = m * ndtr(m / s) + s / SQRT_2PI * math.exp(-m * m / (2 * s * s))
        worst_z = max(worst_z, (est - b) / se if se > 0 else (0.0 if est <= b else math.inf))
        worst_exact = max(worst_exact, exact - b)
    reports.append(CheckReport("positive_part_expectation(MC, 4 SE)", worst_z <= 4.0, worst_z, 4.0, 1.0,
                               n_mc * len(pairs), seed, f"{len(pairs)} (m, s) pairs; stat in SE units"))
    reports.append(CheckReport("positive_part_expectation(closed form)", worst_exact <= 1e-15, worst_exact,
                               1e-15, 0.0, len(pairs), None, "m Phi(m/s) + s phi(m/s) vs bound"))
    return reports


def randomized_schedules(domain_size=1000):
    dom = DomainInfo.finite(domain_size)
    return [
        ConfidenceSchedule(Variant.TWO_PARAM_EXP_FINITE, dom),
        ConfidenceSchedule(Variant.GAMMA, dom, theta=1.0),
        ConfidenceSchedule(Variant.TRUNC_NORMAL, dom),
    ]


def check_samplers(seed=0, n_draws=10**6, n_ks=10**5, t=1, domain_size=1000):
    """Sampler moments and the inverse-transform identity for the shifted exponential."""
    reports = []
    rng = _mc_stream(seed, "samplers")
    exp_sched, gamma_sched, tn_sched = randomized_schedules(domain_size)
    s, lam = irgpucb_params(exp_sched.domain, "finite")
    draws = sample_zeta(exp_sched, t, rng, size=n_draws)
    reports.append(CheckReport("two_param_exp_min>=s", bool(draws.min() >= s), float(draws.min()), s, 0.0,
                               n_draws, seed))
    se = 1.0 / lam / math.sqrt(n_draws)
    target = s + 1.0 / lam
    reports.append(CheckReport("two_param_exp_mean(4 SE)", abs(draws.mean() - target) <= 4 * se,
                               float(draws.mean()), target, se, n_draws, seed, f"|diff| <= {4 * se:.4g}"))
    ours = sample_zeta(exp_sched, t, rng, size=n_ks)
    inverse = s - 2.0 * np.log(rng.random(n_ks))
    ks = ks_2samp(ours, inverse)
    reports.append(CheckReport("two_param_exp_vs_s-2lnU(KS p)", ks.pvalue > 1e-3, float(ks.pvalue), 1e-3, 0.0,
                               2 * n_ks, seed, f"KS D={ks.statistic:.5f}"))
    for sched in (exp_sched, gamma_sched, tn_sched):
        z = sample_zeta(sched, t, rng, size=n_draws)
        m_emp = float(np.exp(-z / 2.0).mean())
        m_an = mgf_at_minus_half(sched, t)
        se_m = math.sqrt(max(mgf_variance(sched, t), 0.0) / n_draws)
        reports.append(CheckReport(f"mgf(-1/2)[{sched.variant.value}](4 SE)", abs(m_emp - m_an) <= 4 * se_m,
                                   m_emp, m_an, se_m, n_draws, seed, f"|diff|={abs(m_emp - m_an):.3g}"))
        e_an = expected_zeta(sched, t)
        se_e = math.sqrt(variance_zeta(sched, t) / n_draws)
        reports.append(CheckReport(f"mean[{sched.variant.value}](4 SE)", abs(z.mean() - e_an) <= 4 * se_e,
                                   float(z.mean()), e_an, se_e, n_draws, seed))
    return reports


@dataclass
class HorizonResult:
    T: int | None
    gamma_T: float
    satisfied: bool
    lhs: float
    note: str


def bsr_horizon(eta, domain, kernel, grid, noise_variance, t_max=None):
    """Smallest T whose simple-regret bound drops below ``eta``, with greedy MIG estimates.

    Finite domains require ``sqrt(C1 (2 + s) gamma_T / T) <= eta``; continuous
    domains require ``sqrt(C1 (2 + s_eta) gamma_T / T) <= eta / 2``. Because the
    greedy estimate is a lower bound on gamma_T, the returned T is a lower
    bound on the certified horizon.
    """
    if not eta > 0:
        raise InputError("eta must be positive")
    grid = _as_points(kernel, grid)
    t_max = len(grid) if t_max is None else min(t_max, len(grid))
    c1 = c1_constant(noise_variance)
    if domain.is_finite:
        s, _ = irgpucb_params(domain, "finite")
        target = eta
    else:
        s, _ = irgpucb_params(domain, "accuracy", eta=eta)
        target = eta / 2.0
    _, gains = greedy_gains(kernel, grid, t_max, noise_variance)
    T = np.arange(1, t_max + 1)
    lhs = np.sqrt(c1 * (2.0 + s) * gains / T)
    ok = np.flatnonzero(lhs <= target)
    if len(ok) == 0:
        return HorizonResult(None, float(gains[-1]), False, float(lhs[-1]),
                             f"unsatisfiable on this grid up to T={t_max} (gamma_T is a greedy lower bound)")
    k = int(ok[0])
    return HorizonResult(int(T[k]), float(gains[k]), True, float(lhs[k]),
                         "T is a lower bound on the certified horizon (gamma_T is a greedy lower bound)")


def infogain_suite(seed=0):
    """Run a small harness experiment and check the information-gain bound on every trace."""
    from .harness import ExperimentConfig, run_experiment

    cfg = ExperimentConfig(objective="gp_sample", dim=2, grid_size=10, grid_spacing=0.1, length_scales=[0.2],
                           fit_every=0, policies=["irgp_ucb", "gp_ucb", "rgp_ucb", "ei", "ts"],
                           noise_variance=1e-4, horizon=30, n_trials=3, base_seed=seed, n_initial=1)
    rep = run_experiment(cfg)
    kernel = cfg.kernel()
    c1 = c1_constant(1e-4)
    reports = [CheckReport("C1(sigma^2=1e-4)", abs(c1 - 0.21715) <= 1e-5, c1, 0.21715, 0.0, 1, None)]
    for p in cfg.policies:
        for tr in rep.traces[p]:
            reports.append(check_info_gain_bound(tr, kernel, cfg.noise_variance))
    return reports


def default_grid(points_per_dim=10, dim=2, spacing=0.1):
    return grid_candidates(np.arange(points_per_dim) * spacing, dim).points


def run_suite(name, seed=0):
    """Reports for a named suite (``all`` runs every suite)."""
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, seed)]
    kern = KernelSpec("SquaredExponential", (0.2, 0.2))
    if name == "coverage":
        return [check_ucb_coverage(kern, default_grid(), 5, 0.1, 2000, seed)]
    if name == "maxbound":
        return [check_max_bound(kern, default_grid(), n, 2000, seed) for n in (0, 5, 20)]
    if name == "mgf":
        return [check_mgf_condition(n, th, 1000) for n in (10, 1000) for th in (0.5, 1.0, 2.0)]
    if name == "infogain":
        return infogain_suite(seed)
    if name == "tails":
        return check_tail_bounds(seed=seed)
    if name == "samplers":
        return check_samplers(seed=seed)
    raise InputError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")


def write_reports_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "passed", "statistic", "threshold", "stderr", "n_samples", "seed", "detail"])
        for r in reports:
            w.writerow([r.name, int(r.passed), format(r.statistic, ".17g"), format(r.threshold, ".17g"),
                        format(r.stderr, ".17g"), r.n_samples, "" if r.seed is None else r.seed, r.detail])
