import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from irgpucb.acquisition import select_next
from irgpucb.errors import InputError
from irgpucb.gp import fit_posterior
from irgpucb.harness import (
    TRACE_HEADER,
    ExperimentConfig,
    RegretTrace,
    TraceRow,
    aggregate,
    build_objective,
    build_policy,
    export,
    read_trace_csv,
    run_experiment,
    run_trial,
    write_trace_csv,
)
from irgpucb import rng as rngs

SVG_NS = "{http://www.w3.org/2000/svg}"


def small_config(**kw):
    base = dict(objective="gp_sample", dim=2, grid_size=6, grid_spacing=0.2, length_scales=[0.2], fit_every=0,
                policies=["irgp_ucb", "gp_ucb"], horizon=8, n_trials=3, base_seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


def tabular(tmp_path, n=3, seed=0):
    vals = np.random.default_rng(seed).standard_normal(n)
    lines = ["x,y"] + [f"{i},{float(v)!r}" for i, v in enumerate(vals)]
    path = tmp_path / "tab.csv"
    path.write_text("\n".join(lines) + "\n")
    return str(path), vals


def test_single_step_trace_matches_prior_selection(tmp_path):
    path, _ = tabular(tmp_path)
    cfg = ExperimentConfig(objective="tabular", tabular_path=path, length_scales=[0.3], fit_every=0,
                           policies=["gp_ucb"], horizon=1, n_trials=1, n_initial=0, noise_variance=0.0)
    tr = run_trial(cfg, 0)
    assert len(tr.rows) == 1
    obj = build_objective(cfg, 0)
    prior = fit_posterior(cfg.kernel(), np.zeros((0, 1)), [], 1e-10)
    pol = build_policy("gp_ucb", cfg, obj)
    expected, _ = select_next(pol, prior, obj.candidates, 1, rngs.stream(cfg.base_seed, "policy", 0, "gp_ucb"))
    assert tr.rows[0].index == expected


def test_identical_trials_are_bit_identical():
    cfg = small_config(policies=["irgp_ucb", "ts", "ei"], fit_every=3)
    for p in cfg.policies:
        a, b = run_trial(cfg, 1, p), run_trial(cfg, 1, p)
        assert a.rows == b.rows and a.initial == b.initial


def test_trial_independent_of_other_policies():
    solo = run_trial(small_config(policies=["irgp_ucb"]), 2, "irgp_ucb")
    report = run_experiment(small_config(policies=["gp_ucb", "irgp_ucb"]))
    assert report.traces["irgp_ucb"][2].rows == solo.rows


def test_exhaustive_coverage_noiseless_five_points(tmp_path):
    path, vals = tabular(tmp_path, n=5, seed=4)
    cfg = ExperimentConfig(objective="tabular", tabular_path=path, length_scales=[0.05], fit_every=0,
                           policies=["gp_ucb"], horizon=5, n_trials=1, n_initial=0, noise_variance=0.0)
    tr = run_trial(cfg, 0)
    assert tr.simple_regret[-1] == 0.0
    assert max(r.f for r in tr.rows) == vals.max()


def test_regret_invariants_and_d0_accounting():
    cfg = small_config(n_initial=3)
    tr = run_trial(cfg, 0, "irgp_ucb")
    assert len(tr.initial) == 3 and len(tr.rows) == cfg.horizon
    sr, cr = tr.simple_regret, tr.cumulative_regret
    assert np.all(sr >= 0) and np.all(np.diff(sr) <= 0) and np.all(np.diff(cr) >= 0)
    assert cr[0] == pytest.approx(tr.true_max - tr.rows[0].f)
    values = build_objective(cfg, 0).values
    best = max([values[i] for i, _, _ in tr.initial] + [tr.rows[0].f])
    assert sr[0] == tr.true_max - best
    assert np.all(tr.zetas >= 2 * math.log(36 / 2))


def test_invariant_checker_rejects_bad_trace():
    tr = RegretTrace("x", 0, 0, "h", 1.0)
    tr.rows = [TraceRow(1, 0, (0.0,), 0.0, None, 0.1, 0.1, 1.0, 0.9),
               TraceRow(2, 0, (0.0,), 0.0, None, 0.2, 0.3, 1.0, 0.8)]
    with pytest.raises(AssertionError):
        tr.check_invariants()


def test_single_trial_aggregate_has_zero_stderr():
    rep = run_experiment(small_config(n_trials=1))
    agg = rep.aggregates["irgp_ucb"]
    np.testing.assert_array_equal(agg.stderr_sr, 0.0)
    np.testing.assert_array_equal(agg.mean_sr, rep.traces["irgp_ucb"][0].simple_regret)


def test_bcr_estimate_is_mean_final_cumulative_regret():
    rep = run_experiment(small_config(n_trials=4))
    for p in rep.config.policies:
        finals = [tr.cumulative_regret[-1] for tr in rep.traces[p]]
        assert rep.aggregates[p].bcr_estimate == pytest.approx(np.mean(finals), rel=1e-15)
        agg = rep.aggregates[p]
        assert np.all(agg.mean_sr <= agg.mean_cr / agg.iters + 1e-12)


def test_trials_share_function_in_blocks():
    cfg = small_config(designs_per_function=2)
    a, b, c = (build_objective(cfg, i).values for i in (0, 1, 2))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_incomplete_traces_excluded_from_aggregate():
    cfg = small_config(n_trials=2)
    trs = [run_trial(cfg, i, "gp_ucb") for i in range(2)]
    trs[1].complete = False
    agg = aggregate("gp_ucb", trs)
    assert agg.n_completed == 1 and agg.n_failed == 1


def test_trace_csv_round_trip(tmp_path):
    cfg = small_config(policies=["irgp_ucb"], noise_variance=1e-4)
    trs = [run_trial(cfg, i) for i in range(2)]
    path = tmp_path / "trace.csv"
    write_trace_csv(trs, path)
    back = read_trace_csv(path)
    rows = [(tr.trial, r) for tr in trs for r in tr.rows]
    assert len(back) == len(rows)
    for rec, (trial, r) in zip(back, rows):
        assert rec["trial"] == trial and rec["iter"] == r.t and rec["x"] == r.x
        assert rec["y"] == r.y and rec["zeta"] == r.zeta
        assert rec["simple_regret"] == r.simple_regret and rec["cumulative_regret"] == r.cumulative_regret


def test_empty_trace_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_trace_csv([RegretTrace("p", 0, 0, "h", 0.0)], path)
    assert path.read_text() == ",".join(TRACE_HEADER) + "\n"
    assert read_trace_csv(path) == []


def test_export_artifacts_and_svg(tmp_path):
    cfg = small_config(policies=["irgp_ucb", "gp_ucb", "ei"], out_dir=str(tmp_path / "out"))
    rep = run_experiment(cfg)
    paths = export(rep)
    names = {p.rsplit("/", 1)[-1] for p in paths}
    for p in cfg.policies:
        assert f"trace_{p}.csv" in names and f"aggregate_{p}.csv" in names
    root = ET.parse(tmp_path / "out" / "simple_regret.svg").getroot()
    assert len(root.findall(f".//{SVG_NS}polyline")) == 3
    conf = ET.parse(tmp_path / "out" / "confidence.svg").getroot()
    assert len(conf.findall(f".//{SVG_NS}polyline")) == 2
    resolved = json.loads((tmp_path / "out" / "config.resolved.json").read_text())
    assert resolved["policies"] == cfg.policies and resolved["_metadata"]["config_hash"] == cfg.config_hash()


def test_export_is_byte_identical(tmp_path):
    cfg = small_config(policies=["rgp_ucb", "ts"])
    export(run_experiment(cfg), str(tmp_path / "a"))
    export(run_experiment(cfg), str(tmp_path / "b"))
    for name in ("trace_rgp_ucb.csv", "trace_ts.csv", "aggregate_ts.csv", "simple_regret.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_equals_serial():
    cfg = small_config(n_trials=3)
    serial = run_experiment(cfg, workers=1)
    parallel = run_experiment(cfg, workers=2)
    for p in cfg.policies:
        assert [t.rows for t in serial.traces[p]] == [t.rows for t in parallel.traces[p]]


def test_config_validation(tmp_path):
    with pytest.raises(InputError):
        ExperimentConfig(horizon=0)
    with pytest.raises(InputError):
        ExperimentConfig(policies=["bogus"])
    with pytest.raises(InputError):
        ExperimentConfig.from_dict({"horizon": 5, "colour": "red"})
    with pytest.raises(InputError):
        ExperimentConfig(objective="tabular")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        ExperimentConfig.from_file(str(bad))
    with pytest.raises(InputError):
        ExperimentConfig.from_file(str(tmp_path / "missing.json"))


def test_config_hash_ignores_output_location():
    assert small_config(out_dir="a").config_hash() == small_config(out_dir="b", workers=3).config_hash()
    assert small_config().config_hash() != small_config(horizon=9).config_hash()


def test_kernel_dimension_mismatch():
    cfg = small_config(length_scales=[0.2, 0.2, 0.2])
    with pytest.raises(InputError):
        run_trial(cfg, 0)


def test_benchmark_objective_run():
    cfg = ExperimentConfig(objective="HolderTable", pool_size=128, length_scales=[0.2], fit_every=5,
                           hyper_budget=40, policies=["irgp_ucb"], horizon=10, n_trials=1, n_initial=4,
                           standardize_y=True)
    tr = run_trial(cfg, 0)
    assert tr.complete and tr.refits == 2 and len(tr.rows) == 10
