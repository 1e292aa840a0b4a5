"""Acceptance suite: one test per release criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -v`; the terminal summary prints one
PASS/FAIL line per criterion. Tolerances are pinned here and nowhere else.
"""

import datetime as dt
import json
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from volspill.cli import main as cli_main
from volspill.correlation import (
    StdResidualPanel,
    dcc_filter,
    dcc_loglik,
    fit_ccc,
    fit_dcc,
    fit_gdcc,
    generalized_filter,
    q_update_direct,
    q_update_rearranged,
    unconditional_corr,
)
from volspill.diagnostics import (
    ADF_CRITICAL_VALUES,
    LJUNG_BOX_CHI2_20_CRIT_5PCT,
    adf_test,
    arch_lm,
    jarque_bera,
    ljung_box,
)
from volspill.garch import GarchParams, GarchSpec, fit_garch
from volspill.simulate import Dgp, recovery_study, simulate
from volspill.switching import (
    PlantParams,
    SwitchContext,
    classify_regime,
    marginal_cost,
    marginal_cost_variance,
    switch_price_lower,
    switch_price_upper,
)

from conftest import make_dates

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

# R paths produced along the way; criterion 4 validates all of them
COLLECTED_R_PATHS: list[np.ndarray] = []


def _collect(r_path: np.ndarray) -> np.ndarray:
    COLLECTED_R_PATHS.append(np.asarray(r_path))
    return r_path


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    dgp = Dgp(univariate=(GarchParams(0.05, (0.05,), (), (0.9,)),) * 2,
              correlation="dcc", rho=0.3, corr_alpha=0.02, corr_beta=0.9, T=300, seed=0)
    sim = simulate(dgp)
    fit_garch(sim.returns.values[:, 0], GarchSpec(1, 0, 1))


def test_criterion_01_garch_recovery_bias_and_runtime():
    dgp = Dgp(univariate=(GarchParams(0.05, (0.05,), (), (0.90,)),), T=5000, seed=101)
    start = time.perf_counter()
    report = recovery_study(dgp, replications=50)
    elapsed = time.perf_counter() - start
    assert report.n_failures == 0
    assert np.all(np.abs(report.bias) < 0.02), report.bias
    assert elapsed < 60.0, f"recovery took {elapsed:.1f}s"


def test_criterion_02_dcc_recovery_bias_and_typicality():
    uni = (GarchParams(0.05, (0.05,), (), (0.90,)),) * 2
    dgp = Dgp(
        univariate=uni, correlation="dcc", rho=0.5, corr_alpha=0.02, corr_beta=0.95,
        T=5000, seed=202,
    )
    report = recovery_study(dgp, replications=50)
    assert report.n_failures == 0
    names = list(report.parameter_names)
    bias_alpha = report.bias[names.index("corr_alpha")]
    bias_beta = report.bias[names.index("corr_beta")]
    assert abs(bias_alpha) < 0.01, bias_alpha
    assert abs(bias_beta) < 0.03, bias_beta
    alphas = report.estimates[:, names.index("corr_alpha")]
    betas = report.estimates[:, names.index("corr_beta")]
    envelope = np.mean((alphas <= 0.04) & (alphas + betas > 0.80))
    assert envelope >= 0.90, envelope


def _panel(values: np.ndarray) -> StdResidualPanel:
    names = tuple(f"x{i}" for i in range(values.shape[1]))
    return StdResidualPanel(make_dates(values.shape[0]), names, values)


def test_criterion_03_nesting_and_reduction_identities():
    rng = np.random.default_rng(303)
    z = rng.standard_normal((1500, 2))
    chol = np.linalg.cholesky(np.array([[1.0, 0.4], [0.4, 1.0]]))
    panel = _panel(z @ chol.T)

    # (a) zero-dynamics likelihood equals the constant-correlation likelihood
    ccc = fit_ccc(panel)
    _, r_zero = dcc_filter(panel, 0.0, 0.0)
    assert abs(dcc_loglik(panel, _collect(r_zero)) - ccc.loglik) < 1e-6

    # (b) equal diagonal loadings reproduce the scalar recursion
    qbar = unconditional_corr(panel.values)
    alpha, beta = 0.04, 0.9
    q_scalar, r_scalar = dcc_filter(panel, alpha, beta, qbar)
    _collect(r_scalar)
    a = np.full(2, np.sqrt(alpha))
    b = np.full(2, np.sqrt(beta))
    q_equal, _ = generalized_filter(panel, a, b, np.zeros(2), Qbar=qbar, Nbar=np.zeros((2, 2)))
    assert np.max(np.abs(q_scalar - q_equal)) < 1e-8

    # (c) the asymmetric recursion with zero negative-shock loadings is the
    # symmetric one, both at the filter level and after estimation
    av, bv = np.array([0.15, 0.25]), np.array([0.9, 0.8])
    q_sym, r_sym = generalized_filter(panel, av, bv, None)
    q_zero_g, _ = generalized_filter(panel, av, bv, np.zeros(2))
    _collect(r_sym)
    assert np.max(np.abs(q_sym - q_zero_g)) < 1e-12
    sym_fit = fit_gdcc(panel, asymmetric=False)
    asym_fit = fit_gdcc(panel, asymmetric=True)
    _collect(sym_fit.R_path)
    _collect(asym_fit.R_path)
    assert asym_fit.loglik >= sym_fit.loglik - 1e-4

    # (d) direct and rearranged one-step updates agree on random loadings
    for _ in range(100):
        k = int(rng.integers(2, 6))
        a_r = rng.uniform(0.0, 0.5, k)
        b_r = rng.uniform(0.0, 0.7, k)
        g_r = rng.uniform(0.0, 0.4, k)
        zz = rng.standard_normal((40, k))
        qb = unconditional_corr(zz)
        neg = np.minimum(zz, 0.0)
        nb = neg.T @ neg / zz.shape[0]
        xi_prev = rng.standard_normal(k)
        q_prev = qb + 0.1 * np.eye(k)
        delta = q_update_direct(qb, nb, a_r, b_r, g_r, xi_prev, q_prev) - q_update_rearranged(
            qb, nb, a_r, b_r, g_r, xi_prev, q_prev
        )
        assert np.max(np.abs(delta)) < 1e-12


def test_criterion_04_correlation_path_validity():
    rng = np.random.default_rng(404)
    paths = list(COLLECTED_R_PATHS)
    # standalone battery so the criterion holds even when run in isolation
    for _ in range(10):
        k = int(rng.integers(2, 6))
        values = rng.standard_normal((400, k))
        alpha = float(rng.uniform(0.0, 0.2))
        beta = float(rng.uniform(0.4, 0.98 - alpha))
        _, r_path = dcc_filter(values, alpha, beta)
        paths.append(r_path)
    uni = (GarchParams(0.05, (0.05,), (0.05,), (0.85,)),) * 2
    sim = simulate(Dgp(univariate=uni, correlation="dcc", rho=0.4, corr_alpha=0.03,
                       corr_beta=0.9, T=2000, seed=404))
    fits = [fit_garch(sim.returns.values[:, i], GarchSpec(1, 1, 1)) for i in range(2)]
    panel = StdResidualPanel.from_fits(fits, sim.returns.dates)
    paths.append(fit_dcc(panel).R_path)
    assert len(paths) >= 11
    for r_path in paths:
        assert np.max(np.abs(r_path)) <= 1.0 + 1e-12
        diag = np.diagonal(r_path, axis1=1, axis2=2)
        assert np.all(diag == 1.0)
        assert float(np.linalg.eigvalsh(r_path).min()) >= -1e-10


def test_criterion_05_brute_force_oracle_equivalence():
    rng = np.random.default_rng(505)
    for _ in range(10):
        values = rng.standard_normal((10, 2))
        alpha = float(rng.uniform(0.01, 0.15))
        beta = float(rng.uniform(0.5, 0.97 - alpha))
        qbar = unconditional_corr(rng.standard_normal((50, 2)))
        sigmas = np.exp(rng.normal(0.0, 0.2, size=(10, 2)))

        q_path, r_path = dcc_filter(values, alpha, beta, qbar)
        ours = dcc_loglik(values, r_path, sigmas)

        # independent direct implementation: dense loops, inv/det
        q_ref = np.empty((10, 2, 2))
        ll_ref = 0.0
        for t in range(10):
            if t == 0:
                q_ref[t] = qbar
            else:
                q_ref[t] = (
                    (1 - alpha - beta) * qbar
                    + alpha * np.outer(values[t - 1], values[t - 1])
                    + beta * q_ref[t - 1]
                )
            d = np.diag(1.0 / np.sqrt(np.diag(q_ref[t])))
            r_t = d @ q_ref[t] @ d
            quad = values[t] @ np.linalg.inv(r_t) @ values[t]
            ll_ref += -0.5 * (
                2 * np.log(2 * np.pi) + np.log(np.linalg.det(r_t)) + quad
            )
            ll_ref -= np.log(sigmas[t, 0]) + np.log(sigmas[t, 1])
        assert np.max(np.abs(q_path - q_ref)) < 1e-10
        assert abs(ours - ll_ref) < 1e-10


def test_criterion_06_diagnostics_calibration():
    assert LJUNG_BOX_CHI2_20_CRIT_5PCT == 31.41
    assert ADF_CRITICAL_VALUES["constant"][0.01] == -3.44

    rng = np.random.default_rng(606)
    n, reps = 2000, 1000
    rejections = np.zeros(3)
    for _ in range(reps):
        x = rng.standard_normal(n)
        rejections[0] += jarque_bera(x).reject_at[0.05]
        rejections[1] += ljung_box(x, 20).reject_at[0.05]
        rejections[2] += arch_lm(x, 20).reject_at[0.05]
    sizes = rejections / reps
    assert np.all(np.abs(sizes - 0.05) <= 0.02), sizes

    adf_reps = 500
    reject_wn = 0
    keep_rw = 0
    for _ in range(adf_reps):
        reject_wn += adf_test(rng.standard_normal(n), max_lag=6).reject_at[0.01]
        keep_rw += not adf_test(np.cumsum(rng.standard_normal(n)), max_lag=6).reject_at[0.05]
    assert reject_wn / adf_reps >= 0.95, reject_wn / adf_reps
    assert keep_rw / adf_reps >= 0.90, keep_rw / adf_reps


def test_criterion_07_gjr_asymmetry_detection():
    true = GarchParams(0.05, (0.03,), (0.10,), (0.85,))
    positive = 0
    reps = 50
    for rep in range(reps):
        sim = simulate(Dgp(univariate=(true,), T=10000, seed=(707, rep)))
        eps = sim.returns.values[:, 0]
        sym = fit_garch(eps, GarchSpec(1, 0, 1))
        asym = fit_garch(eps, GarchSpec(1, 1, 1))
        positive += asym.params.gamma[0] > 0.0
        assert asym.loglik >= sym.loglik - 1e-6, f"rep {rep}"
    assert positive / reps >= 0.95


def _random_context(rng) -> SwitchContext:
    n_coal_e = rng.uniform(0.38, 0.52)
    n_coal_i = rng.uniform(0.24, n_coal_e)
    n_gas_e = rng.uniform(0.48, 0.62)
    n_gas_i = rng.uniform(0.30, n_gas_e)
    return SwitchContext(
        coal_efficient=PlantParams("coal", n_coal_e, rng.uniform(88.0, 105.0)),
        coal_inefficient=PlantParams("coal", n_coal_i, rng.uniform(95.0, 118.0)),
        gas_efficient=PlantParams("gas", n_gas_e, rng.uniform(50.0, 60.0)),
        gas_inefficient=PlantParams("gas", n_gas_i, rng.uniform(50.0, 60.0)),
        fuel_cost_coal=rng.uniform(1.0, 4.5),
        fuel_cost_gas=rng.uniform(3.0, 10.0),
    )


def test_criterion_08_switch_price_indifference_and_sweep():
    rng = np.random.default_rng(808)
    for _ in range(100):
        ctx = _random_context(rng)
        sp_u = switch_price_upper(ctx)
        sp_l = switch_price_lower(ctx)
        assert marginal_cost(ctx.coal_efficient, ctx.fuel_cost_coal, sp_u) == pytest.approx(
            marginal_cost(ctx.gas_inefficient, ctx.fuel_cost_gas, sp_u), abs=1e-10
        )
        assert marginal_cost(ctx.coal_inefficient, ctx.fuel_cost_coal, sp_l) == pytest.approx(
            marginal_cost(ctx.gas_efficient, ctx.fuel_cost_gas, sp_l), abs=1e-10
        )
        lo = min(sp_l, sp_u) - 0.05
        hi = max(sp_l, sp_u) + 0.05
        sweep = np.linspace(lo, hi, 257)
        regimes = [classify_regime(p, ctx) for p in sweep]
        changes = sum(a != b for a, b in zip(regimes, regimes[1:]))
        assert changes <= 2  # at most three contiguous segments


def test_criterion_09_marginal_cost_variance_monte_carlo():
    rng = np.random.default_rng(909)
    for _ in range(10):
        plant = PlantParams(
            "coal" if rng.uniform() < 0.5 else "gas",
            rng.uniform(0.3, 0.6),
            rng.uniform(50.0, 110.0),
        )
        sigma_fc = rng.uniform(0.2, 2.0)
        sigma_ec = rng.uniform(0.001, 0.02)
        rho = rng.uniform(-0.9, 0.9)
        cov = np.array(
            [
                [sigma_fc**2, rho * sigma_fc * sigma_ec],
                [rho * sigma_fc * sigma_ec, sigma_ec**2],
            ]
        )
        draws = rng.multivariate_normal([3.0, 0.015], cov, size=10**6)
        mc = (
            draws[:, 0] / plant.efficiency
            + plant.emission_factor / plant.efficiency * draws[:, 1]
        )
        analytic = marginal_cost_variance(plant, sigma_fc, sigma_ec, rho)
        assert abs(analytic - float(np.var(mc))) / analytic < 0.01


RUN_CFG = """[input]
prices = prices.csv

[mean]
mode = arma
max_ar = 1
max_ma = 0
criterion = bic

[volatility]
model = gjr

[correlation]
model = dcc
pairs = aa/bb

[windows]
crisis = 2008-06-01:2008-12-31

[run]
output_dir = out
seed = 1010
"""


def test_criterion_10_end_to_end_determinism(tmp_path):
    uni = (GarchParams(0.05, (0.05,), (), (0.9,)),) * 2
    dgp = Dgp(univariate=uni, correlation="dcc", rho=0.4, corr_alpha=0.03,
              corr_beta=0.9, T=400, seed=1010, asset_names=("aa", "bb"))
    sim = simulate(dgp)
    rets = sim.returns.values / 100.0
    prices = 100.0 * np.exp(np.cumsum(np.vstack([np.zeros(2), rets]), axis=0))
    d0 = dt.date(2008, 1, 2)
    with open(tmp_path / "prices.csv", "w") as fh:
        fh.write("date,aa,bb\n")
        for i, row in enumerate(prices):
            fh.write((d0 + dt.timedelta(days=i)).isoformat() + ","
                     + ",".join(f"{v:.10f}" for v in row) + "\n")
    (tmp_path / "run.cfg").write_text(RUN_CFG)

    runner = CliRunner()
    out = tmp_path / "out"
    snapshots = []
    for _ in range(2):
        result = runner.invoke(cli_main, ["run", str(tmp_path / "run.cfg")])
        assert result.exit_code == 0, result.output
        snapshots.append(
            {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
        )
    assert snapshots[0].keys() == snapshots[1].keys()
    for key in snapshots[0]:
        assert snapshots[0][key] == snapshots[1][key], f"{key} differs between runs"
    manifest = json.loads((out / "MANIFEST.json").read_text())
    assert manifest["complete"] is True
