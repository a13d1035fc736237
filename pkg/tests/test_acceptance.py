"""End-to-end acceptance checks, one test per criterion, each at its stated tolerance and time limit."""

import csv
import math
import time

import numpy as np
import pytest

from irgpucb.cli import main
from irgpucb.confidence import DomainInfo, beta_gpucb, expected_zeta, gamma_kappa, make_schedule
from irgpucb.gp import fit_posterior, predict_many
from irgpucb.harness import ExperimentConfig, export, run_experiment
from irgpucb.kernel import KernelSpec, cross_kernel, gram_matrix
from irgpucb.validate import (
    c1_constant,
    check_info_gain_bound,
    check_max_bound,
    check_samplers,
    check_tail_bounds,
    check_ucb_coverage,
    default_grid,
    run_suite,
    write_reports_csv,
)

KERN2 = KernelSpec("SquaredExponential", (0.2, 0.2))


@pytest.fixture(scope="module")
def synthetic_run(tmp_path_factory):
    """Grid GP-sample setup: d=3, l=0.1, |X|=1000, noise 1e-4, T=100, 10 functions x 10 designs."""
    cfg = ExperimentConfig(objective="gp_sample", dim=3, grid_size=10, grid_spacing=0.1, length_scales=[0.1],
                           fit_every=0, policies=["irgp_ucb", "gp_ucb"], noise_variance=1e-4, horizon=100,
                           n_trials=100, designs_per_function=10, base_seed=0, n_initial=1)
    out = tmp_path_factory.mktemp("synthetic")
    start = time.perf_counter()
    report = run_experiment(cfg)
    paths = export(report, str(out))
    return cfg, report, out, paths, time.perf_counter() - start


def test_criterion_01_posterior_oracle(acceptance):
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    err_m = err_v = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        t = int(rng.integers(1, 31))
        kern = KernelSpec("SquaredExponential", tuple(rng.uniform(0.05, 0.5, d)))
        X, y = rng.uniform(0, 1, (t, d)), rng.standard_normal(t)
        Xq = rng.uniform(0, 1, (20, d))
        mean, var = predict_many(fit_posterior(kern, X, y, 1e-4), Xq)
        Kinv = np.linalg.inv(gram_matrix(kern, X) + 1e-4 * np.eye(t))
        Ks = cross_kernel(kern, X, Xq)
        err_m = max(err_m, np.max(np.abs(mean - Ks.T @ Kinv @ y)))
        err_v = max(err_v, np.max(np.abs(var - (1.0 - np.sum(Ks * (Kinv @ Ks), axis=0)))))
    elapsed = time.perf_counter() - start
    ok = err_m <= 1e-8 and err_v <= 1e-8 and elapsed < 10
    acceptance(1, ok, f"posterior oracle: max|dmean|={err_m:.2e} max|dvar|={err_v:.2e} in {elapsed:.2f}s")
    assert ok


def test_criterion_02_samplers(acceptance):
    start = time.perf_counter()
    reports = check_samplers(seed=0, n_draws=10**6, n_ks=10**5, t=1, domain_size=1000)
    elapsed = time.perf_counter() - start
    by_name = {r.name: r for r in reports}
    mean = by_name["two_param_exp_mean(4 SE)"]
    ok = all(r.passed for r in reports) and elapsed < 30
    ok = ok and abs(mean.statistic - 14.4292) <= 0.008 + 1e-4
    ok = ok and by_name["two_param_exp_min>=s"].statistic >= 12.4292
    acceptance(2, ok, f"samplers: {sum(r.passed for r in reports)}/{len(reports)} checks, "
                      f"exp2 mean={mean.statistic:.5f}, KS p={by_name['two_param_exp_vs_s-2lnU(KS p)'].statistic:.3g}, "
                      f"{elapsed:.1f}s")
    assert ok, [r.line() for r in reports if not r.passed]


def test_criterion_03_mgf_condition(acceptance):
    start = time.perf_counter()
    reports = run_suite("mgf")
    elapsed = time.perf_counter() - start
    ok = len(reports) == 6 and all(r.passed for r in reports) and elapsed < 1
    worst = max(r.statistic for r in reports)
    acceptance(3, ok, f"MGF condition: 6 (|X|, theta) combos x t<=1000, worst M-bound={worst:.2e}, {elapsed:.3f}s")
    assert ok


def test_criterion_04_ucb_coverage(acceptance):
    start = time.perf_counter()
    rep = check_ucb_coverage(KERN2, default_grid(), n_obs=5, delta=0.1, n_mc=2000, seed=0)
    elapsed = time.perf_counter() - start
    ok = rep.statistic <= 0.120 and elapsed < 120
    acceptance(4, ok, f"UCB coverage: violation frequency {rep.statistic:.4f} <= 0.120, {elapsed:.1f}s")
    assert ok


def test_criterion_05_max_bound(acceptance):
    start = time.perf_counter()
    reports = [check_max_bound(KERN2, default_grid(), n, 2000, seed=0) for n in (0, 5, 20)]
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in reports) and elapsed < 180
    gaps = ", ".join(f"n_obs={n}: {r.statistic:+.3f} (thr {r.threshold:+.3f})" for n, r in zip((0, 5, 20), reports))
    acceptance(5, ok, f"max bound gaps {gaps}, {elapsed:.1f}s")
    assert ok


def test_criterion_06_information_gain(acceptance, synthetic_run):
    cfg, report, *_ = synthetic_run
    c1 = c1_constant(1e-4)
    checks = [r for r in run_suite("infogain") if r.name.startswith("info_gain_bound")]
    for p in cfg.policies:
        checks += [check_info_gain_bound(tr, cfg.kernel(), cfg.noise_variance) for tr in report.traces[p]]
    failures = [r for r in checks if not r.passed]
    c1_ok = abs(c1 - 0.21715) <= 1e-5
    ok = c1_ok and not failures
    acceptance(6, ok, f"info-gain bound: {len(checks) - len(failures)}/{len(checks)} traces pass, C1={c1:.7f}")
    assert ok, [r.line() for r in failures]


def test_criterion_07_schedule_magnitudes(acceptance, capsys):
    dom = DomainInfo.finite(1000)
    assert main(["calc", "beta", "--domain-size", "1000", "--t", "1", "500"]) == 0
    printed = capsys.readouterr().out
    values = {
        "beta_1": (beta_gpucb(dom, 1), 11.978),
        "beta_500": (beta_gpucb(dom, 500), 36.836),
        "irgp_mean": (expected_zeta(make_schedule("irgp_ucb", dom), 1), 14.429),
        "irgp_mean_t500": (expected_zeta(make_schedule("irgp_ucb", dom), 500), 14.429),
        "kappa_1": (gamma_kappa(1000, 1, 1.0), 17.036),
        "gamma_mean_1": (expected_zeta(make_schedule("rgp_ucb", dom), 1), 17.036),
    }
    diffs = {k: abs(v - ref) for k, (v, ref) in values.items()}
    ok = all(d <= 1e-3 for d in diffs.values()) and "11.97763" in printed and "36.83606" in printed
    acceptance(7, ok, "schedules: " + ", ".join(f"{k}={v:.4f}" for k, (v, _) in values.items()))
    assert ok, diffs


def test_criterion_08_regret_ordering(acceptance, synthetic_run):
    cfg, report, out, paths, elapsed = synthetic_run
    sr_irgp = report.aggregates["irgp_ucb"].bsr_estimate
    sr_gp = report.aggregates["gp_ucb"].bsr_estimate
    n_irgp = report.aggregates["irgp_ucb"].n_completed
    n_gp = report.aggregates["gp_ucb"].n_completed
    emitted = True
    for p in cfg.policies:
        with open(out / f"trace_{p}.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        emitted = emitted and len(rows) == cfg.n_trials * cfg.horizon and all(r["zeta"] for r in rows)
        if p == "gp_ucb":
            dom = DomainInfo.finite(1000)
            emitted = emitted and all(
                float(r["zeta"]) == pytest.approx(beta_gpucb(dom, int(r["iter"])), rel=1e-15) for r in rows
            )
        else:
            emitted = emitted and min(float(r["zeta"]) for r in rows) >= 2 * math.log(500)
    ok = sr_irgp <= sr_gp and n_irgp >= 30 and n_gp >= 30 and emitted and elapsed < 600
    acceptance(8, ok, f"final mean simple regret IRGP-UCB={sr_irgp:.4f} vs GP-UCB={sr_gp:.4f} "
                      f"over {n_irgp}/{n_gp} trials, artifacts={'yes' if emitted else 'no'}, {elapsed:.0f}s")
    assert ok


def test_criterion_09_tail_bounds(acceptance):
    start = time.perf_counter()
    reports = check_tail_bounds(c_values=np.linspace(0.01, 5.0, 100), n_mc=10**6, seed=0)
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in reports) and elapsed < 30
    acceptance(9, ok, f"tail bounds: {sum(r.passed for r in reports)}/{len(reports)} families, "
                      f"worst MC z={reports[1].statistic:+.2f} SE, {elapsed:.1f}s")
    assert ok


def test_criterion_10_determinism(acceptance, tmp_path):
    cfg = ExperimentConfig(objective="gp_sample", dim=2, grid_size=8, grid_spacing=0.1, length_scales=[0.2],
                           fit_every=4, hyper_budget=40, policies=["irgp_ucb", "gp_ucb", "rgp_ucb", "ei", "ts"],
                           horizon=20, n_trials=3, n_initial=2, base_seed=7)
    for name in ("a", "b"):
        export(run_experiment(cfg), str(tmp_path / name), formats=("csv",))
        write_reports_csv(run_suite("all", seed=5), tmp_path / name / "validate_all_seed5.csv")
    files = sorted(p.name for p in (tmp_path / "a").iterdir() if p.suffix == ".csv")
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    ok = same and len(files) == 2 * len(cfg.policies) + 1
    acceptance(10, ok, f"determinism: {len(files)} CSV files byte-identical across reruns: {same}")
    assert ok
