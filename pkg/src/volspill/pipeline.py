"""End-to-end orchestration: returns -> diagnostics -> mean -> volatility ->
correlation -> summaries, emitting the report bundle.

Stage failures abort the run but keep partial outputs on disk, with the
MANIFEST recording which stages completed and what failed. Pair estimations
run concurrently up to the configured worker count; everything else is
sequential and deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, config_hash, load_switch_context
from .correlation import (
    AgdccFit,
    CccFit,
    DccFit,
    DccSummary,
    StdResidualPanel,
    WindowStats,
    fit_ccc,
    fit_dcc,
    fit_gdcc,
    summarize_dcc,
)
from .data import PriceFrame, ReturnSeries, load_prices, log_returns
from .diagnostics import (
    adf_test,
    arch_lm,
    jarque_bera,
    ljung_box,
    pp_test,
    summary_stats,
)
from .errors import NonConvergence, VolspillError
from .garch import GarchSpec, UnivariateFit, fit_garch
from .mean import fit_arma, fit_var, select_arma_order, select_var_order
from .report import (
    Provenance,
    render_rho_figure,
    render_volatility_figure,
    summary_rows,
    write_csv,
    write_manifest,
)
from .switching import (
    classify_regime,
    eur_per_kg_to_eur_per_tonne,
    switch_price_lower,
    switch_price_upper,
)

__all__ = ["PipelineResult", "StageFailure", "run_pipeline", "effective_workers"]

STAGES = (
    "load",
    "returns",
    "diagnostics",
    "mean",
    "volatility",
    "correlation",
    "summaries",
    "regimes",
    "figures",
)


class StageFailure(VolspillError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PairResult:
    """Normalized per-pair outputs regardless of pairwise or joint estimation."""

    pair: tuple[str, str]
    rho_ccc: float
    alpha: float
    beta: float
    loglik: float
    rho_path: np.ndarray
    summary: DccSummary
    ccc: CccFit
    dynamic: Optional[DccFit | AgdccFit]


@dataclass
class PipelineResult:
    prices: PriceFrame
    returns: ReturnSeries
    univariate: dict  # name -> {"garch": fit, "gjr": fit}
    mean_info: dict
    pair_results: list[PairResult]
    outputs: dict = field(default_factory=dict)
    manifest_path: Optional[Path] = None


def effective_workers(requested: Optional[int], n_tasks: int) -> int:
    cap = os.environ.get("VOLSPILL_THREADS")
    workers = requested if requested else min(4, max(n_tasks, 1))
    if cap:
        workers = min(workers, max(int(cap), 1))
    return max(min(workers, n_tasks), 1)


def _fit_or_best(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs), True
    except NonConvergence as exc:
        if exc.best is not None:
            return exc.best, False
        raise


def run_pipeline(config: RunConfig, raw: bool = False) -> PipelineResult:
    """Execute every stage of the run config and write the report bundle."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    provenance = Provenance(__version__, config_hash(config.raw_text), config.seed)
    stages = {name: "pending" for name in STAGES}
    outputs: dict[str, Path] = {}

    def finish(stage: str) -> None:
        stages[stage] = "complete"

    def manifest(complete: bool, error: Optional[dict] = None) -> Path:
        return write_manifest(out / "MANIFEST.json", stages, complete, provenance, error)

    current = "load"
    try:
        frame = load_prices(
            config.prices_path,
            date_column=config.date_column,
            date_format=config.date_format,
            delimiter=config.delimiter,
        )
        if config.assets:
            frame = frame.select(config.assets)
        _validate_pairs(config, frame.assets)
        finish("load")

        current = "returns"
        returns = log_returns(frame)
        finish("returns")

        current = "diagnostics"
        outputs["summary_stats"] = _emit_diagnostics(
            out / "summary_stats.csv", frame, returns, config.diag_lags, provenance, raw
        )
        finish("diagnostics")

        current = "mean"
        residuals, mean_info = _mean_stage(returns, config)
        finish("mean")

        current = "volatility"
        univariate = _volatility_stage(residuals, returns.assets)
        outputs["garch_params"] = _emit_garch_params(
            out / "garch_params.csv", univariate, config.vol_model, provenance, raw
        )
        outputs["loglik"] = _emit_loglik(
            out / "loglik.csv", univariate, mean_info, provenance, raw
        )
        finish("volatility")

        current = "correlation"
        pair_results = _correlation_stage(returns, univariate, config)
        outputs["dcc_pairs"] = _emit_pairs(
            out / "dcc_pairs.csv", pair_results, config.corr_model, provenance, raw
        )
        outputs["rho_paths"] = _emit_rho_paths(
            out / "rho_paths.csv", pair_results, returns, provenance, raw
        )
        finish("correlation")

        current = "summaries"
        outputs["dcc_summary"] = write_csv(
            out / "dcc_summary.csv",
            ["pair", "window", "mean", "min", "max"],
            [row for res in pair_results for row in summary_rows(res.summary)],
            provenance,
            raw,
        )
        finish("summaries")

        current = "regimes"
        if config.switch_context_path is not None:
            outputs["regimes"] = _emit_regimes(out / "regimes.csv", frame, config, provenance, raw)
            finish("regimes")
        else:
            stages["regimes"] = "skipped"

        current = "figures"
        outputs.update(
            _render_figures(out / "figures", pair_results, univariate, returns, config)
        )
        finish("figures")
    except Exception as exc:
        stages[current] = "failed"
        manifest(False, {"stage": current, "type": type(exc).__name__, "message": str(exc)})
        raise StageFailure(current, exc) from exc

    manifest_path = manifest(True)
    return PipelineResult(
        prices=frame,
        returns=returns,
        univariate=univariate,
        mean_info=mean_info,
        pair_results=pair_results,
        outputs=outputs,
        manifest_path=manifest_path,
    )


def _validate_pairs(config: RunConfig, assets: tuple[str, ...]) -> None:
    for a, b in config.pairs:
        for name in (a, b):
            if name not in assets:
                raise VolspillError(f"pair references unknown asset {name!r}")


def _emit_diagnostics(path, frame, returns, lags, provenance, raw):
    stats_rows = []
    for panel, data in (("levels", frame), ("returns", returns)):
        columns = {a: data.column(a) for a in data.assets}
        per_stat: dict[str, list] = {}

        def put(stat: str, values: list) -> None:
            per_stat[stat] = values

        summaries = {a: summary_stats(columns[a]) for a in data.assets}
        for stat in ("n", "mean", "median", "max", "min", "std_dev", "skewness", "kurtosis"):
            put(stat, [getattr(summaries[a], stat) for a in data.assets])
        jb = {a: jarque_bera(columns[a]) for a in data.assets}
        put("jb_stat", [jb[a].statistic for a in data.assets])
        put("jb_pvalue", [jb[a].p_value for a in data.assets])
        adf = {a: adf_test(columns[a]) for a in data.assets}
        put("adf_stat", [adf[a].statistic for a in data.assets])
        put("adf_pvalue", [adf[a].p_value for a in data.assets])
        pp = {a: pp_test(columns[a]) for a in data.assets}
        put("pp_stat", [pp[a].statistic for a in data.assets])
        put("pp_pvalue", [pp[a].p_value for a in data.assets])
        if panel == "returns":
            q = {a: ljung_box(columns[a], lags) for a in data.assets}
            put(f"q{lags}_stat", [q[a].statistic for a in data.assets])
            put(f"q{lags}_pvalue", [q[a].p_value for a in data.assets])
            q2 = {a: ljung_box(columns[a], lags, squared=True) for a in data.assets}
            put(f"q2_{lags}_stat", [q2[a].statistic for a in data.assets])
            put(f"q2_{lags}_pvalue", [q2[a].p_value for a in data.assets])
            lm = {a: arch_lm(columns[a], lags) for a in data.assets}
            put(f"archlm{lags}_stat", [lm[a].statistic for a in data.assets])
            put(f"archlm{lags}_pvalue", [lm[a].p_value for a in data.assets])
        for stat, values in per_stat.items():
            stats_rows.append([panel, stat] + values)
    return write_csv(
        path,
        ["panel", "statistic"] + list(frame.assets),
        stats_rows,
        provenance,
        raw,
    )


def _mean_stage(returns: ReturnSeries, config: RunConfig):
    """Filter serial correlation; returns (residual matrix T x k, per-series info)."""
    info: dict[str, dict] = {}
    if config.mean_mode == "var":
        order = config.var_order
        if order is None:
            order = select_var_order(returns, p_max=config.max_ar, criterion=config.criterion)
        fit = fit_var(returns, order)
        for name in returns.assets:
            info[name] = {"ar": order, "ma": 0, "aic": fit.aic, "loglik": fit.loglik}
        return fit.residuals.values, info
    residual_cols = []
    for j, name in enumerate(returns.assets):
        x = returns.values[:, j]
        spec = select_arma_order(
            x, max_ar=config.max_ar, max_ma=config.max_ma, criterion=config.criterion
        )
        fit, _ = _fit_or_best(fit_arma, x, spec, dates=returns.dates, name=name)
        residual_cols.append(fit.residuals.values[:, 0])
        info[name] = {
            "ar": spec.ar_order,
            "ma": spec.ma_order,
            "aic": fit.aic,
            "loglik": fit.loglik,
        }
    return np.column_stack(residual_cols), info


def _volatility_stage(residuals: np.ndarray, assets: tuple[str, ...]):
    """Fit the symmetric and asymmetric specs on every residual series."""
    univariate: dict[str, dict[str, UnivariateFit]] = {}
    for j, name in enumerate(assets):
        eps = residuals[:, j]
        garch, _ = _fit_or_best(fit_garch, eps, GarchSpec(1, 0, 1), name=name)
        gjr, _ = _fit_or_best(fit_garch, eps, GarchSpec(1, 1, 1), name=name)
        univariate[name] = {"garch": garch, "gjr": gjr}
    return univariate


def _emit_garch_params(path, univariate, vol_model, provenance, raw):
    rows = []
    for name, fits in univariate.items():
        fit = fits["gjr" if vol_model == "gjr" else "garch"]
        gamma = fit.params.gamma[0] if fit.params.gamma else 0.0
        rows.append(
            [
                name,
                "gjr" if vol_model == "gjr" else "garch",
                fit.params.omega,
                fit.params.alpha[0],
                gamma,
                fit.params.beta[0] if fit.params.beta else 0.0,
                fit.persistence,
                fit.loglik,
            ]
        )
    return write_csv(
        path,
        ["series", "model", "omega", "alpha_1", "gamma_1", "beta_1", "persistence", "loglik"],
        rows,
        provenance,
        raw,
    )


def _emit_loglik(path, univariate, mean_info, provenance, raw):
    rows = []
    for name, fits in univariate.items():
        mi = mean_info[name]
        rows.append(
            [
                name,
                fits["garch"].loglik,
                fits["gjr"].loglik,
                mi["ar"],
                mi["ma"],
                mi["aic"],
                mi["loglik"],
            ]
        )
    return write_csv(
        path,
        ["series", "ll_garch11", "ll_gjr111", "mean_ar", "mean_ma", "mean_aic", "mean_loglik"],
        rows,
        provenance,
        raw,
    )


def _pairs_for(config: RunConfig, assets: tuple[str, ...]):
    if config.pairs:
        return list(config.pairs)
    return [(assets[i], assets[j]) for i in range(len(assets)) for j in range(i + 1, len(assets))]


def _ccc_summary(pair, rho: float, dates, windows) -> DccSummary:
    rows = [WindowStats("total", rho, rho, rho)]
    for window in windows:
        if window.mask(dates).any():
            rows.append(WindowStats(window.label, rho, rho, rho))
    return DccSummary(pair, tuple(rows))


def _pair_dynamics(fit, i: int, j: int):
    """(alpha, beta) table entries for the pair (i, j) of a fitted model.

    For diagonal-loading models the pair's off-diagonal recursion has news
    coefficient a_i*a_j and decay b_i*b_j, so those products are reported.
    """
    if isinstance(fit, DccFit):
        return fit.alpha_total, fit.beta_total
    return float(fit.A[i] * fit.A[j]), float(fit.B[i] * fit.B[j])


def _fit_pair(panel: StdResidualPanel, model: str, windows) -> PairResult:
    pair = (panel.assets[0], panel.assets[1])
    ccc = fit_ccc(panel)
    rho_ccc = float(ccc.R[0, 1])
    if model == "ccc":
        rho_path = np.full(panel.n_obs, rho_ccc)
        summary = _ccc_summary(pair, rho_ccc, panel.dates, windows)
        return PairResult(pair, rho_ccc, 0.0, 0.0, ccc.loglik, rho_path, summary, ccc, None)
    if model == "dcc":
        fit, _ = _fit_or_best(fit_dcc, panel)
    else:
        fit, _ = _fit_or_best(fit_gdcc, panel, model == "agdcc")
    alpha, beta = _pair_dynamics(fit, 0, 1)
    summary = summarize_dcc(fit, pair, windows)
    return PairResult(
        pair, rho_ccc, alpha, beta, fit.loglik, fit.R_path[:, 0, 1], summary, ccc, fit
    )


def _joint_results(panel: StdResidualPanel, model: str, windows) -> list[PairResult]:
    """One joint fit over all assets, unpacked into per-pair rows."""
    ccc = fit_ccc(panel)
    index_pairs = [
        (i, j) for i in range(panel.k) for j in range(i + 1, panel.k)
    ]
    results = []
    if model == "ccc":
        for i, j in index_pairs:
            pair = (panel.assets[i], panel.assets[j])
            rho = float(ccc.R[i, j])
            summary = _ccc_summary(pair, rho, panel.dates, windows)
            results.append(
                PairResult(pair, rho, 0.0, 0.0, ccc.loglik, np.full(panel.n_obs, rho), summary, ccc, None)
            )
        return results
    if model == "dcc":
        fit, _ = _fit_or_best(fit_dcc, panel)
    else:
        fit, _ = _fit_or_best(fit_gdcc, panel, model == "agdcc")
    for i, j in index_pairs:
        pair = (panel.assets[i], panel.assets[j])
        alpha, beta = _pair_dynamics(fit, i, j)
        summary = summarize_dcc(fit, (i, j), windows)
        results.append(
            PairResult(
                pair,
                float(ccc.R[i, j]),
                alpha,
                beta,
                fit.loglik,
                fit.R_path[:, i, j],
                summary,
                ccc,
                fit,
            )
        )
    return results


def _correlation_stage(returns: ReturnSeries, univariate, config: RunConfig):
    chosen = "gjr" if config.vol_model == "gjr" else "garch"
    fits = {name: univariate[name][chosen] for name in returns.assets}
    if config.joint and not config.pairs:
        panel = StdResidualPanel.from_fits(list(fits.values()), returns.dates)
        return _joint_results(panel, config.corr_model, config.windows)
    pairs = _pairs_for(config, returns.assets)
    panels = [
        StdResidualPanel.from_fits([fits[a], fits[b]], returns.dates) for a, b in pairs
    ]
    workers = effective_workers(config.workers, len(panels))
    if workers == 1:
        return [_fit_pair(p, config.corr_model, config.windows) for p in panels]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda p: _fit_pair(p, config.corr_model, config.windows), panels)
        )


def _emit_pairs(path, pair_results, model, provenance, raw):
    rows = [
        [
            res.pair[0],
            res.pair[1],
            res.rho_ccc,
            res.alpha,
            res.beta,
            res.alpha + res.beta,
            res.loglik,
        ]
        for res in pair_results
    ]
    return write_csv(
        path,
        ["asset_i", "asset_j", "rho_ccc", "alpha", "beta", "alpha_plus_beta", "loglik"],
        rows,
        provenance,
        raw,
    )


def _emit_rho_paths(path, pair_results, returns, provenance, raw):
    rows = []
    for res in pair_results:
        for date, value in zip(returns.dates, res.rho_path):
            rows.append([date.isoformat(), res.pair[0], res.pair[1], float(value)])
    return write_csv(
        path, ["date", "asset_i", "asset_j", "rho"], rows, provenance, raw
    )


def _emit_regimes(path, frame: PriceFrame, config: RunConfig, provenance, raw):
    ctx = load_switch_context(config.switch_context_path)
    prices = frame.column(config.eua_asset)
    sp_l = eur_per_kg_to_eur_per_tonne(switch_price_lower(ctx))
    sp_u = eur_per_kg_to_eur_per_tonne(switch_price_upper(ctx))
    rows = []
    for date, price in zip(frame.dates, prices):
        regime = classify_regime(price / 1000.0, ctx)  # quoted EUR/t, model in EUR/kg
        rows.append([date.isoformat(), float(price), sp_l, sp_u, regime.value])
    return write_csv(
        path,
        ["date", "eua_price", "sp_lower", "sp_upper", "regime"],
        rows,
        provenance,
        raw,
    )


def _render_figures(fig_dir: Path, pair_results, univariate, returns, config: RunConfig):
    outputs = {}
    chosen = "gjr" if config.vol_model == "gjr" else "garch"
    sigma_paths = {
        name: np.sqrt(univariate[name][chosen].sigma2_path) for name in returns.assets
    }
    outputs["fig_volatility"] = render_volatility_figure(
        fig_dir / "volatility.png", returns.dates, sigma_paths, config.windows
    )
    for res in pair_results:
        name = f"rho_{res.pair[0]}_{res.pair[1]}.png"
        outputs[f"fig_{res.pair[0]}_{res.pair[1]}"] = render_rho_figure(
            fig_dir / name,
            returns.dates,
            res.rho_path,
            res.pair,
            config.windows,
            ccc_level=res.rho_ccc,
        )
    return outputs


def version_and_provenance(config: RunConfig) -> dict:
    """Metadata stamped into outputs: version, config digest, seed, generator."""
    return {
        "version": __version__,
        "config": config_hash(config.raw_text),
        "seed": config.seed,
        "rng": "pcg64",
    }
