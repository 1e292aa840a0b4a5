"""Command-line entry points: run, diag, sim, regime.

`volspill run <config>` executes the full pipeline and writes the report
bundle; the other commands expose the diagnostics battery, the simulation
oracle and the fuel-switching regime classifier on their own.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import config_hash, load_dgp_config, load_run_config, load_switch_context
from .data import load_prices, log_returns
from .diagnostics import (
    adf_test,
    arch_lm,
    jarque_bera,
    ljung_box,
    pp_test,
    summary_stats,
)
from .errors import VolspillError
from .pipeline import StageFailure, run_pipeline
from .report import Provenance, write_csv
from .simulate import recovery_study, simulate
from .switching import (
    classify_regime,
    eur_per_kg_to_eur_per_tonne,
    switch_price_lower,
    switch_price_upper,
)

pass_through_errors = (VolspillError, OSError, ValueError)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Conditional-volatility, dynamic-correlation and fuel-switching toolkit."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--raw", is_flag=True, help="print full-precision numbers instead of 6 significant digits")
def run(config_path: str, raw: bool) -> None:
    """Run the full pipeline described by a config file."""
    try:
        config = load_run_config(config_path)
        result = run_pipeline(config, raw=raw)
    except StageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except pass_through_errors as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {len(result.outputs)} outputs to {config.output_dir}")


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--date-column", default="date", show_default=True)
@click.option("--date-format", default="iso", show_default=True)
@click.option("--delimiter", default=",", show_default=True)
@click.option("--lags", default=20, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write CSV here instead of stdout")
def diag(csv_path: str, date_column: str, date_format: str, delimiter: str, lags: int, out) -> None:
    """Summary statistics and the test battery for a price CSV (levels and returns)."""
    try:
        frame = load_prices(csv_path, date_column, None, date_format, delimiter)
        returns = log_returns(frame)
        rows = []
        for panel, data in (("levels", frame), ("returns", returns)):
            for asset in data.assets:
                x = data.column(asset)
                s = summary_stats(x)
                jb = jarque_bera(x)
                adf = adf_test(x)
                pp = pp_test(x)
                row = [
                    panel, asset, s.n, s.mean, s.median, s.max, s.min,
                    s.std_dev, s.skewness, s.kurtosis,
                    jb.statistic, jb.p_value, adf.statistic, adf.p_value,
                    pp.statistic, pp.p_value,
                ]
                if panel == "returns":
                    q = ljung_box(x, lags)
                    q2 = ljung_box(x, lags, squared=True)
                    lm = arch_lm(x, lags)
                    row += [q.statistic, q.p_value, q2.statistic, q2.p_value, lm.statistic, lm.p_value]
                else:
                    row += [""] * 6
                rows.append(row)
    except pass_through_errors as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    header = [
        "panel", "series", "n", "mean", "median", "max", "min", "std_dev",
        "skewness", "kurtosis", "jb_stat", "jb_pvalue", "adf_stat", "adf_pvalue",
        "pp_stat", "pp_pvalue", f"q{lags}_stat", f"q{lags}_pvalue",
        f"q2_{lags}_stat", f"q2_{lags}_pvalue", f"archlm{lags}_stat", f"archlm{lags}_pvalue",
    ]
    provenance = Provenance(__version__, config_hash(Path(csv_path).read_text()), "-")
    if out:
        write_csv(Path(out), header, rows, provenance)
        click.echo(f"wrote {out}")
    else:
        click.echo(",".join(header))
        for row in rows:
            click.echo(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


@main.command()
@click.argument("dgp_config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default="sim_out", show_default=True)
@click.option("--recovery", type=int, default=0, help="run a recovery study with this many replications")
@click.option("--raw", is_flag=True)
def sim(dgp_config: str, out: str, recovery: int, raw: bool) -> None:
    """Simulate a configured DGP; optionally re-estimate it many times."""
    try:
        dgp = load_dgp_config(dgp_config)
        provenance = Provenance(
            __version__, config_hash(Path(dgp_config).read_text()), dgp.seed
        )
        out_dir = Path(out)
        result = simulate(dgp)
        returns_rows = [
            [d.isoformat()] + [float(v) for v in row]
            for d, row in zip(result.returns.dates, result.returns.values)
        ]
        write_csv(
            out_dir / "returns.csv",
            ["date"] + list(result.returns.assets),
            returns_rows,
            provenance,
            raw,
        )
        sigma_rows = [
            [d.isoformat()] + [float(v) for v in row]
            for d, row in zip(result.returns.dates, result.sigma2_paths)
        ]
        write_csv(
            out_dir / "true_sigma2.csv",
            ["date"] + list(result.returns.assets),
            sigma_rows,
            provenance,
            raw,
        )
        k = result.returns.values.shape[1]
        rho_rows = []
        for i in range(k):
            for j in range(i + 1, k):
                for d, r in zip(result.returns.dates, result.r_path[:, i, j]):
                    rho_rows.append(
                        [d.isoformat(), result.returns.assets[i], result.returns.assets[j], float(r)]
                    )
        write_csv(
            out_dir / "true_rho.csv",
            ["date", "asset_i", "asset_j", "rho"],
            rho_rows,
            provenance,
            raw,
        )
        if recovery:
            report = recovery_study(dgp, recovery)
            rows = [
                [name, true, mean, bias, rmse]
                for name, true, mean, bias, rmse in zip(
                    report.parameter_names,
                    report.true_values,
                    report.mean_estimates,
                    report.bias,
                    report.rmse,
                )
            ]
            rows.append(["n_failures", report.n_failures, "", "", ""])
            write_csv(
                out_dir / "recovery.csv",
                ["parameter", "true", "mean", "bias", "rmse"],
                rows,
                provenance,
                raw,
            )
    except pass_through_errors as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote simulation outputs to {out}")


@main.command()
@click.argument("context_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("prices_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--asset", default="eua", show_default=True, help="price column holding the carbon price (EUR/t)")
@click.option("--date-column", default="date", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="regimes.csv", show_default=True)
@click.option("--raw", is_flag=True)
def regime(context_path: str, prices_path: str, asset: str, date_column: str, out: str, raw: bool) -> None:
    """Classify each day's carbon price against the switch-price band."""
    try:
        ctx = load_switch_context(context_path)
        frame = load_prices(prices_path, date_column)
        prices = frame.column(asset)
        sp_l = eur_per_kg_to_eur_per_tonne(switch_price_lower(ctx))
        sp_u = eur_per_kg_to_eur_per_tonne(switch_price_upper(ctx))
        rows = [
            [d.isoformat(), float(p), sp_l, sp_u, classify_regime(p / 1000.0, ctx).value]
            for d, p in zip(frame.dates, prices)
        ]
        provenance = Provenance(
            __version__, config_hash(Path(context_path).read_text()), "-"
        )
        write_csv(
            Path(out),
            ["date", "eua_price", "sp_lower", "sp_upper", "regime"],
            rows,
            provenance,
            raw,
        )
    except pass_through_errors as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
