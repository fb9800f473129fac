import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdi.core import (
    Column,
    DataError,
    fit,
    load_model,
    minmax,
    quantile,
    save_model,
)
from kdi.fast_eval import EvalPlan, Strategy
from kdi.kernels import KernelSpec

GAUSS = KernelSpec.gaussian()
POLY = KernelSpec.polyexp()
KERNEL_PLANS = [
    (POLY, EvalPlan("dp")),
    (GAUSS, EvalPlan("grid")),
    (POLY, EvalPlan("exact")),
    (GAUSS, EvalPlan("exact")),
]
IDS = ["polyexp-dp", "gaussian-grid", "polyexp-exact", "gaussian-exact"]


def sup_dist(a, b):
    return float(np.max(np.abs(a - b)))


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS, ids=IDS)
def test_two_point_column(kernel, plan):
    f = fit([0.0, 1.0], 1.0, kernel, plan)
    assert f.grid.values[0] == 0.0 and f.grid.values[-1] == 1.0
    assert f.transform(0.0) == 0.0
    assert f.transform(1.0) == 1.0
    assert f.transform(0.5) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS, ids=IDS)
def test_endpoints_and_clamping(kernel, plan):
    x = np.random.default_rng(0).lognormal(size=400)
    f = fit(x, 1.0, kernel, plan)
    assert f.transform(x.min()) == 0.0
    assert f.transform(x.max()) == 1.0
    np.testing.assert_array_equal(f.transform([x.min() - 10, x.max() + 10]), [0.0, 1.0])
    assert f.inverse_transform(0.0) == x.min()
    assert f.inverse_transform(1.0) == x.max()


def test_fitted_fields():
    x = np.random.default_rng(1).normal(3, 2, size=300)
    f = fit(Column("v", x), 0.7)
    assert f.x_min == x.min() and f.x_max == x.max()
    assert f.sigma_hat == pytest.approx(np.std(x, ddof=1), rel=1e-15)
    assert f.bandwidth == 0.7 * f.sigma_hat
    assert f.n == 300 and not f.degenerate
    assert f.kernel_scale == pytest.approx(f.bandwidth / np.sqrt(14), rel=1e-15)


@pytest.mark.parametrize("kernel", [POLY, GAUSS], ids=["polyexp", "gaussian"])
def test_malic_acid_concave_above_2_5(wine_malic, kernel):
    f = fit(Column("MalicAcid", wine_malic), 1.0, kernel)
    pos, val = f.grid.positions, f.grid.values
    slope = np.diff(val) / np.diff(pos)
    assert np.all(np.diff(slope[pos[:-1] > 2.5]) <= 1e-12)


def _datasets():
    rng = np.random.default_rng(2024)
    return {
        "normal": rng.normal(size=300),
        "lognormal": rng.lognormal(size=300),
        "exponential": rng.exponential(size=300),
        "t3": rng.standard_t(3, size=300),
        "uniform": rng.uniform(size=300),
        "bimodal": np.r_[rng.normal(-3, 1, 150), rng.normal(3, 1, 150)],
    }


@pytest.mark.parametrize("name", list(_datasets()))
def test_large_alpha_approaches_minmax(name):
    x = _datasets()[name]
    d = [sup_dist(fit(x, a, plan=EvalPlan("exact")).transform(x), minmax(x, x)) for a in (1, 10, 1000)]
    assert d[2] < d[1] < d[0]
    assert d[2] < 1e-2


def test_small_alpha_approaches_ecdf_at_midpoints():
    x = np.arange(1.0, 1001.0)
    mid = x[:-1] + 0.5
    errs = [sup_dist(fit(x, a, plan=EvalPlan("exact")).transform(mid), quantile(x, mid))
            for a in (0.1, 0.01, 0.001)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


@pytest.mark.parametrize("name", ["normal", "lognormal", "exponential", "t3"])
@pytest.mark.parametrize("kernel", [POLY, GAUSS], ids=["polyexp", "gaussian"])
def test_limit_sandwich_unimodal(name, kernel):
    x = _datasets()[name]
    alphas = (0.01, 0.1, 1, 10, 100)
    ts = [fit(x, a, kernel, EvalPlan("exact")).transform(x) for a in alphas]
    to_mm = [sup_dist(t, minmax(x, x)) for t in ts]
    to_q = [sup_dist(t, quantile(x, x)) for t in ts]
    assert all(b <= a + 1e-9 for a, b in zip(to_mm, to_mm[1:]))
    assert all(a <= b + 1e-9 for a, b in zip(to_q, to_q[1:]))


def test_minmax_sandwich_fails_on_uniform():
    # counterexample: on flat data the S-shaped KDI at alpha=1 is
    # farther from min-max than the smoother-tracking fit at alpha=0.1
    x = np.random.default_rng(2024).uniform(size=300)
    d = [sup_dist(fit(x, a, plan=EvalPlan("exact")).transform(x), minmax(x, x)) for a in (0.1, 1)]
    assert d[1] > d[0]


def test_quantile_sandwich_fails_on_uniform():
    x = np.random.default_rng(2024).uniform(size=300)
    d = [sup_dist(fit(x, a, plan=EvalPlan("exact")).transform(x), quantile(x, x)) for a in (1, 10)]
    assert d[1] < d[0]


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS, ids=IDS)
def test_monotone_and_in_range(kernel, plan):
    rng = np.random.default_rng(3)
    x = rng.standard_t(2, size=2000)
    f = fit(x, 0.5, kernel, plan)
    lo, hi = x.min() - 1, x.max() + 1
    a, b = rng.uniform(lo, hi, 100_000), rng.uniform(lo, hi, 100_000)
    a, b = np.minimum(a, b), np.maximum(a, b)
    ta, tb = f.transform(a), f.transform(b)
    assert np.all(ta <= tb)
    assert np.all((ta >= 0) & (tb <= 1))


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS, ids=IDS)
def test_affine_equivariance(kernel, plan):
    rng = np.random.default_rng(4)
    x = rng.gamma(2.0, size=500)
    q = rng.uniform(x.min() - 1, x.max() + 1, 1000)
    a, b = 3.7, -12.25
    t1 = fit(x, 1.0, kernel, plan).transform(q)
    t2 = fit(a * x + b, 1.0, kernel, plan).transform(a * q + b)
    assert sup_dist(t1, t2) < 1e-9


@given(a=st.floats(1e-3, 1e3), b=st.floats(-1e3, 1e3))
def test_affine_equivariance_property(a, b):
    x = np.random.default_rng(5).normal(size=200)
    q = np.linspace(x.min(), x.max(), 50)
    t1 = fit(x, 1.0).transform(q)
    t2 = fit(a * x + b, 1.0).transform(a * q + b)
    assert sup_dist(t1, t2) < 1e-9


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS[:2], ids=IDS[:2])
def test_inverse_round_trip(kernel, plan):
    x = np.random.default_rng(6).uniform(size=1000)
    f = fit(x, 1.0, kernel, plan)
    R = len(f.grid)
    assert R == 1000
    err = np.max(np.abs(x - f.inverse_transform(f.transform(x))))
    assert err <= (x.max() - x.min()) * 2 / R


def test_inverse_rejects_out_of_range():
    f = fit([0.0, 1.0, 2.0])
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            f.inverse_transform(bad)
    assert np.isnan(f.inverse_transform(np.nan))


def test_inverse_flat_segment_returns_left_end():
    # far-apart clusters give a grid whose values saturate in the gap
    x = np.r_[np.linspace(0, 1, 50), np.linspace(1e4, 1e4 + 1, 50)]
    f = fit(x, 0.001, GAUSS, EvalPlan("grid", 50))
    vals, pos = f.grid.values, f.grid.positions
    flat = np.flatnonzero(np.diff(vals) == 0)
    assert flat.size > 0
    i = flat[0]
    assert f.inverse_transform(vals[i]) == pos[np.searchsorted(vals, vals[i], side="left")]
    assert f.inverse_transform(vals[i]) <= pos[i]


def test_minmax_and_quantile_reference():
    col = [1.0, 2.0, 2.0, 3.0]
    # (#<= + #<) / 2N = (3 + 1) / 8
    assert quantile(col, 2.0) == 0.5
    np.testing.assert_array_equal(quantile(col, [0.0, 9.0]), [0.0, 1.0])
    np.testing.assert_array_equal(minmax(col, [1.0, 3.0, 2.0, -5.0, 7.0]), [0, 1, 0.5, 0, 1])


def test_degenerate_column():
    f = fit([4.0, 4.0, 4.0])
    assert f.degenerate
    np.testing.assert_array_equal(f.transform([3.0, 4.0, 5.0]), [0.0, 0.5, 1.0])
    assert f.inverse_transform(0.3) == 4.0
    g = fit([2.5])
    assert g.degenerate and g.transform(2.5) == 0.5
    with pytest.warns(RuntimeWarning):
        out = minmax([4.0, 4.0], [3.0, 4.0, 5.0])
    np.testing.assert_array_equal(out, [0.0, 0.5, 1.0])


@pytest.mark.parametrize("bad", [[], [1.0, np.nan], [np.inf, 0.0]])
def test_bad_columns_rejected(bad):
    with pytest.raises(DataError, match="col"):
        Column("col", bad)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        fit([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        fit([1.0, 2.0], -1.0)
    with pytest.raises(ValueError):
        fit([1.0, 2.0], 1.0, GAUSS, EvalPlan("dp"))
    with pytest.raises(ValueError):
        fit([1.0, 2.0], 1.0, POLY, EvalPlan("grid"))


def test_nan_propagates_with_warning():
    f = fit(np.arange(10.0))
    with pytest.warns(RuntimeWarning, match="2 NaN"):
        out = f.transform([1.0, np.nan, 3.0, np.nan])
    assert np.isnan(out[1]) and np.isnan(out[3])
    assert np.all(np.isfinite(out[[0, 2]]))


def test_fit_is_deterministic():
    x = np.random.default_rng(7).normal(size=5000)
    a, b = fit(x), fit(x.copy())
    np.testing.assert_array_equal(a.grid.values, b.grid.values)


@pytest.mark.parametrize("kernel,plan", KERNEL_PLANS, ids=IDS)
def test_serialization_bit_exact(tmp_path, kernel, plan):
    x = np.random.default_rng(8).lognormal(size=700)
    f = fit(Column("c", x), 0.3, kernel, plan)
    path = tmp_path / "m.json"
    save_model(f, path)
    g = load_model(path)["c"]
    q = np.random.default_rng(9).uniform(x.min() - 1, x.max() + 1, 5000)
    np.testing.assert_array_equal(f.transform(q), g.transform(q))
    t = np.linspace(0, 1, 101)
    np.testing.assert_array_equal(f.inverse_transform(t), g.inverse_transform(t))
    assert g.bandwidth == f.bandwidth and g.kernel == f.kernel


def test_load_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"format": "other", "version": 1, "columns": []}')
    with pytest.raises(DataError):
        load_model(p)
    p.write_text('{"format": "kdi-model", "version": 99, "columns": []}')
    with pytest.raises(DataError):
        load_model(p)


def test_strictly_increasing_inside_range():
    x = np.random.default_rng(10).normal(size=200)
    q = np.linspace(x.min(), x.max(), 500)
    for kernel, plan in KERNEL_PLANS:
        assert np.all(np.diff(fit(x, 1.0, kernel, plan).transform(q)) > 0)
