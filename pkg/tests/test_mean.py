import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volspill.data import ReturnSeries
from volspill.errors import SampleTooShort
from volspill.mean import (
    ArmaSpec,
    _ma_from_partials,
    fit_arma,
    fit_var,
    select_arma_order,
    select_var_order,
)

from conftest import make_dates


def series(values: np.ndarray, names=None) -> ReturnSeries:
    values = np.atleast_2d(values.T).T if values.ndim == 1 else values
    k = values.shape[1]
    names = names or tuple(f"s{i}" for i in range(k))
    return ReturnSeries(make_dates(values.shape[0]), names, values)


def simulate_var1(phi: np.ndarray, t: int, rng) -> np.ndarray:
    k = phi.shape[0]
    x = np.zeros((t + 200, k))
    e = rng.standard_normal((t + 200, k))
    for i in range(1, t + 200):
        x[i] = phi @ x[i - 1] + e[i]
    return x[200:]


def test_fit_var_ar1_recovery(rng):
    x = simulate_var1(np.array([[0.5]]), 5000, rng)
    fit = fit_var(series(x), 1)
    se = np.sqrt((1 - 0.25) / 5000)  # asymptotic AR(1) standard error
    assert abs(fit.ar[0][0, 0] - 0.5) < 3 * se


def test_fit_var_order_zero_demeans():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((300, 2)) + 5.0
    fit = fit_var(series(x), 0)
    assert np.allclose(fit.residuals.values, x - x.mean(axis=0), atol=1e-12)


def test_fit_var_trivariate_block_structure(rng):
    x = rng.standard_normal((400, 3))
    fit = fit_var(series(x), 2)
    assert len(fit.ar) == 2
    assert all(mat.shape == (3, 3) for mat in fit.ar)
    assert fit.const.shape == (3,)


def test_fit_var_residuals_orthogonal(rng):
    x = simulate_var1(np.array([[0.4, 0.1], [0.0, 0.3]]), 1000, rng)
    fit = fit_var(series(x), 1)
    resid = fit.residuals.values
    lagged = np.zeros_like(x)
    lagged[1:] = x[:-1]
    for j in range(2):
        assert abs(resid[:, j] @ lagged[:, 0]) / len(x) < 1e-8
        assert abs(resid[:, j].mean()) < 1e-10


def test_fit_var_loglik_monotone_in_order(rng):
    x = simulate_var1(np.array([[0.5, 0.0], [0.2, 0.3]]), 800, rng)
    r = series(x)
    lls = [fit_var(r, p).loglik for p in range(4)]
    for smaller, larger in zip(lls, lls[1:]):
        assert larger >= smaller - 1e-6


def test_fit_var_sample_too_short():
    with pytest.raises(SampleTooShort):
        fit_var(series(np.random.default_rng(0).standard_normal((12, 1))), 2)


def test_select_var_order_white_noise_prefers_zero():
    rng = np.random.default_rng(3)
    hits = sum(
        select_var_order(series(rng.standard_normal((600, 2))), 4, "bic") == 0
        for _ in range(20)
    )
    assert hits >= 18


def test_select_var_order_recovers_two():
    rng = np.random.default_rng(4)
    hits = 0
    for _ in range(10):
        t = 2000
        x = np.zeros((t + 200, 2))
        e = rng.standard_normal((t + 200, 2))
        a1 = np.array([[0.4, 0.1], [0.0, 0.35]])
        a2 = np.array([[0.25, 0.0], [0.1, 0.2]])
        for i in range(2, t + 200):
            x[i] = a1 @ x[i - 1] + a2 @ x[i - 2] + e[i]
        hits += select_var_order(series(x[200:]), 6, "bic") == 2
    assert hits >= 8


def test_select_var_order_forced_zero(rng):
    assert select_var_order(series(rng.standard_normal((100, 1))), 0) == 0


def test_fit_arma_constant_only(rng):
    x = rng.standard_normal(300) + 2.0
    fit = fit_arma(x, ArmaSpec(0, 0))
    assert np.allclose(fit.residuals.values[:, 0], x - x.mean(), atol=1e-6)


def test_fit_arma_ar2_recovery(rng):
    t = 5000
    x = np.zeros(t + 200)
    e = rng.standard_normal(t + 200)
    for i in range(2, t + 200):
        x[i] = 0.4 * x[i - 1] + 0.3 * x[i - 2] + e[i]
    fit = fit_arma(x[200:], ArmaSpec(2, 0))
    assert fit.std_errors is not None
    est = fit.ar
    ses = fit.std_errors[1:3]
    assert abs(est[0] - 0.4) < 3 * ses[0]
    assert abs(est[1] - 0.3) < 3 * ses[1]
    assert fit.ar_stationary


def test_fit_arma_ma_recovery(rng):
    t = 5000
    e = rng.standard_normal(t + 1)
    x = e[1:] + 0.6 * e[:-1]
    fit = fit_arma(x, ArmaSpec(0, 1))
    assert abs(fit.ma[0] - 0.6) < 0.05


def test_fit_arma_residual_mean_small(rng):
    x = rng.standard_normal(2000) * 0.02
    fit = fit_arma(x, ArmaSpec(1, 1))
    sigma = float(np.std(x))
    assert abs(fit.residuals.values.mean()) < 2 * sigma / np.sqrt(2000)


def test_fit_arma_sample_too_short():
    with pytest.raises(SampleTooShort):
        fit_arma(np.zeros(30), ArmaSpec(2, 2))


def test_select_arma_order_white_noise(rng):
    x = rng.standard_normal(1500)
    spec = select_arma_order(x, 2, 2, "bic")
    assert (spec.ar_order, spec.ma_order) == (0, 0)


def test_select_arma_order_finds_ar1(rng):
    t = 3000
    x = np.zeros(t + 100)
    e = rng.standard_normal(t + 100)
    for i in range(1, t + 100):
        x[i] = 0.6 * x[i - 1] + e[i]
    spec = select_arma_order(x[100:], 2, 2, "bic")
    assert spec.ar_order == 1
    assert spec.ma_order == 0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(min_value=-4.0, max_value=4.0, allow_nan=False), min_size=1, max_size=5)
)
def test_ma_transform_always_invertible(theta):
    from volspill.mean import _ma_invertible

    ma = _ma_from_partials(np.asarray(theta))
    assert _ma_invertible(ma)
