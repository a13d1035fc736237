import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgpucb.acquisition import grid_candidates
from irgpucb.errors import InputError
from irgpucb.kernel import KernelSpec
from irgpucb.objective import (
    BENCHMARKS,
    Objective,
    benchmark_name,
    benchmark_objective,
    eval_benchmark,
    export_tabular,
    load_tabular,
    noiseless,
    observe,
    sample_gp_function,
)


def write_csv(path, text):
    path.write_text(text)
    return str(path)


def test_ackley_origin():
    assert eval_benchmark("Ackley", np.zeros(4)) == 0.0


def test_holder_table_optimum():
    v = eval_benchmark("HolderTable", [8.05502, 9.66459])
    assert v == pytest.approx(19.2085, abs=1e-4)
    for sx in (-1, 1):
        for sy in (-1, 1):
            assert eval_benchmark("holder_table", [sx * 8.05502, sy * 9.66459]) == pytest.approx(v)


def test_cross_in_tray_optimum():
    assert eval_benchmark("CrossInTray", [1.34941, 1.34941]) == pytest.approx(2.06261, abs=1e-5)
    assert eval_benchmark("CrossInTray", [-1.34941, 1.34941]) == pytest.approx(2.06261, abs=1e-5)


def test_benchmark_bounds_and_names():
    with pytest.raises(InputError):
        eval_benchmark("Ackley", np.full(4, 40.0))
    with pytest.raises(InputError):
        eval_benchmark("Ackley", np.zeros(2))
    with pytest.raises(InputError):
        benchmark_name("rosenbrock")
    assert benchmark_name("Holder-Table") == "holder_table"


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(sorted(BENCHMARKS)), st.integers(0, 10**6))
def test_benchmarks_never_exceed_known_max(name, seed):
    dim, lo, hi, known = BENCHMARKS[name]
    x = np.random.default_rng(seed).uniform(lo, hi, (64, dim))
    assert np.all(eval_benchmark(name, x) <= known + 1e-4)


def test_vectorized_matches_pointwise():
    X = np.random.default_rng(0).uniform(-10, 10, (20, 2))
    batch = eval_benchmark("cross_in_tray", X)
    assert np.allclose(batch, [eval_benchmark("cross_in_tray", x) for x in X], rtol=1e-14, atol=0)


def test_gp_sample_single_point_prior():
    kern = KernelSpec.isotropic(0.1, 1)
    rng = np.random.default_rng(0)
    vals = np.array([sample_gp_function(kern, [[0.5]], rng).values[0] for _ in range(100000)])
    assert abs(vals.mean()) <= 0.013
    assert abs(vals.var() - 1) <= 0.02


def test_gp_sample_grid_setup_and_reproducibility():
    kern = KernelSpec.isotropic(0.1, 3)
    grid = grid_candidates(np.arange(10) * 0.1, 3)
    a = sample_gp_function(kern, grid, np.random.default_rng(5))
    b = sample_gp_function(kern, grid, np.random.default_rng(5))
    assert len(a.candidates) == 1000
    np.testing.assert_array_equal(a.values, b.values)
    assert a.true_max == a.values[a.argmax]


def test_tabular_two_rows(tmp_path):
    obj = load_tabular(write_csv(tmp_path / "a.csv", "x,y\n0.5,0\n0.7,1\n"))
    assert obj.true_max == 1.0
    assert obj.columns == ("x", "y")
    np.testing.assert_array_equal(obj.candidates.points[:, 0], [0.0, 1.0])


def test_tabular_non_numeric_names_row(tmp_path):
    path = write_csv(tmp_path / "b.csv", "x1,x2,y\n0,1,2\n1,0,high\n")
    with pytest.raises(InputError, match="row 3"):
        load_tabular(path)


def test_tabular_other_errors(tmp_path):
    with pytest.raises(InputError, match="NaN"):
        load_tabular(write_csv(tmp_path / "c.csv", "x,y\n0,1\n1,nan\n"))
    with pytest.raises(InputError, match="rows 2 and 4"):
        load_tabular(write_csv(tmp_path / "d.csv", "x,y\n0,1\n1,2\n0,3\n"))
    with pytest.raises(InputError, match="at least 2"):
        load_tabular(write_csv(tmp_path / "e.csv", "x,y\n0,1\n"))
    with pytest.raises(InputError, match="empty"):
        load_tabular(write_csv(tmp_path / "f.csv", ""))
    with pytest.raises(InputError, match="fields"):
        load_tabular(write_csv(tmp_path / "g.csv", "x,y\n0,1,2\n1,2\n"))


def test_tabular_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    lines = ["a,b,target"] + [",".join(repr(float(v)) for v in row) for row in rng.standard_normal((30, 3))]
    src = load_tabular(write_csv(tmp_path / "src.csv", "\n".join(lines) + "\n"))
    out = tmp_path / "out.csv"
    export_tabular(src, out)
    back = load_tabular(str(out))
    np.testing.assert_array_equal(back.values, src.values)
    np.testing.assert_array_equal(back.raw_points, src.raw_points)
    np.testing.assert_array_equal(back.candidates.points, src.candidates.points)


def test_tabular_without_normalization(tmp_path):
    obj = load_tabular(write_csv(tmp_path / "h.csv", "x,y\n3,0\n5,1\n"), normalize=False)
    np.testing.assert_array_equal(obj.candidates.points[:, 0], [3.0, 5.0])


def test_benchmark_objective_pool():
    obj = benchmark_objective("holder_table", 256, seed=1)
    assert len(obj.candidates) == 256
    assert obj.candidates.points.min() >= 0 and obj.candidates.points.max() <= 1
    assert obj.true_max <= obj.metadata["global_max"]
    np.testing.assert_allclose(obj.values, eval_benchmark("holder_table", obj.raw_points))
    raw = benchmark_objective("holder_table", 256, seed=1, normalize=False)
    np.testing.assert_array_equal(raw.candidates.points, obj.raw_points)


def test_observe_noiseless_exact():
    obj = Objective("gp_sample", grid_candidates([0.0, 0.5, 1.0], 1), [0.1, 0.9, -0.2])
    assert observe(obj, 1, np.random.default_rng(0)) == 0.9
    assert observe(obj, [1.0], np.random.default_rng(0)) == -0.2


def test_observe_noise_std():
    obj = Objective("gp_sample", grid_candidates([0.0, 1.0], 1), [0.3, 0.4], noise_variance=1e-4)
    rng = np.random.default_rng(8)
    ys = np.array([observe(obj, 0, rng) for _ in range(100000)])
    assert abs(ys.std() - 0.01) <= 0.0005
    assert observe(obj, 0, rng) != observe(obj, 0, rng)


def test_observe_unknown_point():
    obj = Objective("tabular", grid_candidates([0.0, 1.0], 1), [0.3, 0.4])
    with pytest.raises(InputError):
        observe(obj, [0.5], np.random.default_rng(0))
    with pytest.raises(InputError):
        observe(obj, 5, np.random.default_rng(0))


def test_benchmark_off_pool_point_evaluated_analytically():
    obj = benchmark_objective("ackley", 64, seed=0)
    assert noiseless(obj, np.full(4, 0.5)) == 0.0


def test_objective_validation():
    c = grid_candidates([0.0, 1.0], 1)
    with pytest.raises(InputError):
        Objective("weird", c, [0.0, 1.0])
    with pytest.raises(InputError):
        Objective("tabular", c, [0.0])
    with pytest.raises(InputError):
        Objective("tabular", c, [0.0, 1.0], noise_variance=-1.0)


def test_true_max_never_exceeded():
    obj = sample_gp_function(KernelSpec.isotropic(0.2, 2), grid_candidates(np.linspace(0, 1, 6), 2),
                             np.random.default_rng(2))
    assert all(noiseless(obj, i) <= obj.true_max for i in range(len(obj.candidates)))
    assert not math.isnan(obj.true_max)
