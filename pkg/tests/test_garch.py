import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volspill.errors import InvalidParams, SampleTooShort, ZeroVariance
from volspill.garch import (
    GarchParams,
    GarchSpec,
    fit_garch,
    garch_filter,
    standardized_residuals,
)
from volspill.simulate import Dgp, simulate

GJR = GarchSpec(1, 1, 1)
SYM = GarchSpec(1, 0, 1)


def simulate_returns(params: GarchParams, t: int, seed: int, shock="gaussian") -> np.ndarray:
    dgp = Dgp(univariate=(params,), T=t, seed=seed, shock=shock)
    return simulate(dgp).returns.values[:, 0]


# -- filter ---------------------------------------------------------------------


def test_filter_constant_variance():
    eps = np.array([0.5, -1.0, 2.0, 0.1])
    path = garch_filter(eps, GarchParams(0.3, (0.0,), (), (0.0,)), SYM)
    assert np.allclose(path[1:], 0.3)


def test_filter_hand_recursion():
    eps = np.array([1.0, 0.2, -0.1])
    path = garch_filter(eps, GarchParams(0.1, (0.2,), (), (0.7,)), SYM, initial=1.0)
    assert path[0] == 1.0
    assert path[1] == pytest.approx(0.1 + 0.2 * 1.0 + 0.7 * 1.0, abs=1e-15)


def test_filter_gjr_sign_convention():
    params = GarchParams(0.1, (0.2,), (0.1,), (0.6,))
    down = garch_filter(np.array([-1.0, 0.0]), params, GJR, initial=1.0)
    up = garch_filter(np.array([1.0, 0.0]), params, GJR, initial=1.0)
    assert down[1] - up[1] == pytest.approx(0.1, abs=1e-12)
    # zero shock is not negative: indicator off
    flat = garch_filter(np.array([0.0, 0.0]), params, GJR, initial=1.0)
    assert flat[1] == pytest.approx(0.1 + 0.6 * 1.0, abs=1e-15)


def test_filter_scaling_invariance(rng):
    eps = rng.standard_normal(500)
    params = GarchParams(0.05, (0.07,), (0.03,), (0.85,))
    base = garch_filter(eps, params, GJR)
    for c in (0.1, 3.0, 42.0):
        scaled_params = GarchParams(0.05 * c**2, (0.07,), (0.03,), (0.85,))
        scaled = garch_filter(c * eps, scaled_params, GJR)
        assert np.allclose(scaled, c**2 * base, rtol=1e-10)


def test_filter_delta_one_family(rng):
    eps = rng.standard_normal(300)
    spec = GarchSpec(1, 0, 1, delta=1)
    params = GarchParams(0.1, (0.1,), (), (0.8,))
    path = garch_filter(eps, params, spec)
    assert np.all(path > 0)
    # sigma recursion on |eps|: second value = (w + a|e1| + b*s0)^2
    s0 = np.sqrt(np.var(eps))
    expected = (0.1 + 0.1 * abs(eps[0]) + 0.8 * s0) ** 2
    assert path[1] == pytest.approx(expected, rel=1e-12)


def test_filter_rejects_bad_params():
    eps = np.array([0.1, -0.2, 0.3, -0.4, 0.5])
    with pytest.raises(InvalidParams):
        garch_filter(eps, GarchParams(-0.1, (0.1,), (), (0.8,)), SYM)
    with pytest.raises(InvalidParams):
        garch_filter(eps, GarchParams(0.1, (-0.05,), (), (0.8,)), SYM)
    with pytest.raises(InvalidParams):
        # alpha + gamma may not be negative
        garch_filter(eps, GarchParams(0.1, (0.05,), (-0.06,), (0.8,)), GJR)
    # negative gamma is allowed while alpha + gamma >= 0
    garch_filter(eps, GarchParams(0.1, (0.05,), (-0.05,), (0.8,)), GJR)


# -- estimation -------------------------------------------------------------------


def test_fit_recovers_within_three_se():
    eps = simulate_returns(GarchParams(0.05, (0.05,), (), (0.90,)), 5000, seed=99)
    fit = fit_garch(eps, SYM)
    assert fit.converged
    assert fit.std_errors is not None
    truth = np.array([0.05, 0.05, 0.90])
    est = np.array([fit.params.omega, fit.params.alpha[0], fit.params.beta[0]])
    assert np.all(np.abs(est - truth) <= 3.0 * fit.std_errors)
    assert 0.90 < fit.persistence < 1.0


def test_fit_gjr_symmetric_data_gamma_near_zero():
    eps = simulate_returns(GarchParams(0.05, (0.08,), (), (0.88,)), 5000, seed=5)
    fit = fit_garch(eps, GJR)
    gamma_se = fit.std_errors[2] if fit.std_errors is not None else 0.02
    assert abs(fit.params.gamma[0]) <= max(3.0 * gamma_se, 0.03)


def test_fit_gjr_dominates_garch_loglik():
    for seed in (1, 2, 3):
        eps = simulate_returns(GarchParams(0.05, (0.04,), (0.08,), (0.88,)), 3000, seed=seed)
        sym = fit_garch(eps, SYM)
        asym = fit_garch(eps, GJR)
        assert asym.loglik >= sym.loglik - 1e-6


def test_fit_persistence_in_reported_range():
    # heavy-tailed shocks at high persistence, as in the published estimates
    eps = simulate_returns(
        GarchParams(0.02, (0.09,), (), (0.89,)), 4000, seed=17, shock="student_t"
    )
    fit = fit_garch(eps, SYM)
    assert 0.5 < fit.persistence < 1.0


def test_fit_loglik_not_below_targeted_start():
    from volspill.garch import _gaussian_loglik, _params_to_theta, _target_start

    eps = simulate_returns(GarchParams(0.05, (0.05,), (), (0.90,)), 3000, seed=23)
    fit = fit_garch(eps, SYM)
    for lam in (0.90, 0.95, 0.98):
        start = _target_start(float(np.var(eps)), SYM, lam)
        start_path = garch_filter(eps, start, SYM)
        assert fit.loglik >= _gaussian_loglik(eps, start_path) - 1e-8


def test_fit_guards():
    with pytest.raises(SampleTooShort):
        fit_garch(np.random.default_rng(0).standard_normal(100))
    with pytest.raises(ZeroVariance):
        fit_garch(np.zeros(500))
    with pytest.raises(InvalidParams):
        fit_garch(np.random.default_rng(0).standard_normal(500), GarchSpec(1, 0, 1, delta=1))


# -- standardized residuals -------------------------------------------------------


def test_standardized_residuals_constant_variance(rng):
    eps = rng.standard_normal(500) * 0.3
    path = garch_filter(eps, GarchParams(0.09, (0.0,), (), (0.0,)), SYM)
    xi = eps / np.sqrt(path)
    assert np.allclose(xi[1:], eps[1:] / 0.3, rtol=1e-12)


def test_standardized_residuals_unit_variance_battery():
    from volspill.diagnostics import ljung_box

    calm = 0
    for seed in range(10):
        eps = simulate_returns(GarchParams(0.05, (0.08,), (), (0.88,)), 3000, seed=seed)
        fit = fit_garch(eps, SYM)
        xi = standardized_residuals(fit)
        assert 0.8 < float(np.mean(xi**2)) < 1.2
        if not ljung_box(xi, 20, squared=True).reject_at[0.05]:
            calm += 1
    assert calm >= 8


def test_fit_reports_loglik_and_variance_path():
    eps = simulate_returns(GarchParams(0.05, (0.05,), (), (0.9,)), 2000, seed=3)
    fit = fit_garch(eps, SYM)
    assert np.all(fit.sigma2_path > 0)
    assert np.isfinite(fit.loglik)
    assert fit.stationary
