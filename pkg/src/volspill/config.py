"""Flat key=value configuration files for the CLI (INI sections, no nesting).

Three file kinds share the format: the pipeline run config, the simulation
DGP config, and the switch-price context. Parsing is strict: unknown assets,
missing files and malformed values fail before any computation starts.
"""

from __future__ import annotations

import configparser
import datetime as dt
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .data import CrisisWindow
from .errors import ConfigError
from .garch import GarchParams
from .simulate import Dgp
from .switching import PlantParams, SwitchContext

__all__ = [
    "RunConfig",
    "load_run_config",
    "load_dgp_config",
    "load_switch_context",
    "config_hash",
]


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline settings plus the paths they came from."""

    prices_path: Path
    date_column: str
    date_format: str
    delimiter: str
    assets: tuple[str, ...]  # empty = all columns
    mean_mode: str  # "arma" | "var"
    max_ar: int
    max_ma: int
    var_order: Optional[int]  # None = select by criterion
    criterion: str
    vol_model: str  # "garch" | "gjr"
    corr_model: str  # "ccc" | "dcc" | "gdcc" | "agdcc"
    pairs: tuple[tuple[str, str], ...]  # empty + joint=True = joint panel
    joint: bool
    windows: tuple[CrisisWindow, ...]
    switch_context_path: Optional[Path]
    eua_asset: str
    output_dir: Path
    seed: int
    diag_lags: int
    workers: Optional[int]
    raw_text: str = field(repr=False, default="")


def _parser(path: Path) -> configparser.ConfigParser:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parser


def _get(parser, section: str, key: str, default=None, required: bool = False):
    if parser.has_option(section, key):
        return parser.get(section, key).strip()
    if required:
        raise ConfigError(f"missing [{section}] {key}")
    return default


def _parse_date(text: str, context: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ConfigError(f"{context}: bad date {text!r} (expected YYYY-MM-DD)") from None


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def load_run_config(path) -> RunConfig:
    path = Path(path)
    parser = _parser(path)
    base = path.parent

    prices = _get(parser, "input", "prices", required=True)
    assets = tuple(_split_list(_get(parser, "input", "assets", default="") or ""))

    mean_mode = (_get(parser, "mean", "mode", default="arma") or "arma").lower()
    if mean_mode not in ("arma", "var"):
        raise ConfigError(f"[mean] mode must be arma or var, got {mean_mode!r}")
    var_order_text = _get(parser, "mean", "var_order", default="auto")
    var_order = None if var_order_text in (None, "", "auto") else int(var_order_text)

    vol_model = (_get(parser, "volatility", "model", default="gjr") or "gjr").lower()
    if vol_model not in ("garch", "gjr"):
        raise ConfigError(f"[volatility] model must be garch or gjr, got {vol_model!r}")

    corr_model = (_get(parser, "correlation", "model", default="dcc") or "dcc").lower()
    if corr_model not in ("ccc", "dcc", "gdcc", "agdcc"):
        raise ConfigError(f"[correlation] model must be ccc|dcc|gdcc|agdcc, got {corr_model!r}")
    joint = (_get(parser, "correlation", "joint", default="false") or "false").lower() in (
        "1",
        "true",
        "yes",
    )
    pairs: list[tuple[str, str]] = []
    pairs_text = _get(parser, "correlation", "pairs", default="")
    if pairs_text:
        for token in _split_list(pairs_text):
            sides = token.split("/")
            if len(sides) != 2:
                raise ConfigError(f"bad pair {token!r}; expected asset1/asset2")
            pairs.append((sides[0].strip(), sides[1].strip()))
    if not pairs and not joint:
        raise ConfigError("[correlation] needs a pairs list or joint = true")
    if assets:
        for a, b in pairs:
            for name in (a, b):
                if name not in assets:
                    raise ConfigError(f"pair references unknown asset {name!r}")

    windows = []
    if parser.has_section("windows"):
        for label, value in parser.items("windows"):
            sides = value.split(":")
            if len(sides) != 2:
                raise ConfigError(f"window {label!r}: expected start:end")
            windows.append(
                CrisisWindow(
                    label,
                    _parse_date(sides[0], f"window {label!r}"),
                    _parse_date(sides[1], f"window {label!r}"),
                )
            )

    switch_text = _get(parser, "switch", "context", default=None)
    switch_path = (base / switch_text) if switch_text else None

    workers_text = _get(parser, "run", "workers", default=None)
    criterion = (_get(parser, "mean", "criterion", default="aic") or "aic").lower()
    if criterion not in ("aic", "bic"):
        raise ConfigError(f"[mean] criterion must be aic or bic, got {criterion!r}")

    return RunConfig(
        prices_path=base / prices,
        date_column=_get(parser, "input", "date_column", default="date"),
        date_format=_get(parser, "input", "date_format", default="iso"),
        delimiter=_get(parser, "input", "delimiter", default=",") or ",",
        assets=assets,
        mean_mode=mean_mode,
        max_ar=int(_get(parser, "mean", "max_ar", default="2")),
        max_ma=int(_get(parser, "mean", "max_ma", default="2")),
        var_order=var_order,
        criterion=criterion,
        vol_model=vol_model,
        corr_model=corr_model,
        pairs=tuple(pairs),
        joint=joint,
        windows=tuple(windows),
        switch_context_path=switch_path,
        eua_asset=_get(parser, "switch", "eua_asset", default="eua"),
        output_dir=base / (_get(parser, "run", "output_dir", default="out")),
        seed=int(_get(parser, "run", "seed", default="0")),
        diag_lags=int(_get(parser, "run", "diag_lags", default="20")),
        workers=int(workers_text) if workers_text else None,
        raw_text=path.read_text(),
    )


def load_dgp_config(path) -> Dgp:
    path = Path(path)
    parser = _parser(path)

    k = int(_get(parser, "dgp", "k", default="1"))
    omegas = _split_list(_get(parser, "univariate", "omega", required=True))
    alphas = _split_list(_get(parser, "univariate", "alpha", required=True))
    gammas = _split_list(_get(parser, "univariate", "gamma", default="") or "")
    betas = _split_list(_get(parser, "univariate", "beta", required=True))

    def per_asset(values: list[str], label: str) -> list[float]:
        if len(values) == 1:
            return [float(values[0])] * k
        if len(values) != k:
            raise ConfigError(f"[univariate] {label} needs 1 or {k} values")
        return [float(v) for v in values]

    omega = per_asset(omegas, "omega")
    alpha = per_asset(alphas, "alpha")
    gamma = per_asset(gammas, "gamma") if gammas else [0.0] * k
    beta = per_asset(betas, "beta")
    univariate = tuple(
        GarchParams(
            omega[i],
            (alpha[i],),
            (gamma[i],) if gamma[i] != 0.0 else (),
            (beta[i],),
        )
        for i in range(k)
    )

    corr_model = (_get(parser, "correlation", "model", default="ccc") or "ccc").lower()
    return Dgp(
        univariate=univariate,
        correlation=corr_model,
        rho=float(_get(parser, "correlation", "rho", default="0")),
        corr_alpha=float(_get(parser, "correlation", "alpha", default="0")),
        corr_beta=float(_get(parser, "correlation", "beta", default="0")),
        shock=(_get(parser, "dgp", "shock", default="gaussian") or "gaussian").lower(),
        shock_df=float(_get(parser, "dgp", "shock_df", default="8")),
        shock_skew=float(_get(parser, "dgp", "shock_skew", default="-4")),
        seed=int(_get(parser, "dgp", "seed", default="0")),
        T=int(_get(parser, "dgp", "t", default="1000")),
        burn_in=int(_get(parser, "dgp", "burn_in", default="1000")),
    )


_PLANT_KEYS = ("coal_efficient", "coal_inefficient", "gas_efficient", "gas_inefficient")


def load_switch_context(path) -> SwitchContext:
    """Read a switch-price context from a [context] key=value file.

    Keys: <plant>.efficiency and <plant>.emission_factor for each of
    coal_efficient, coal_inefficient, gas_efficient, gas_inefficient, plus
    fuel_cost_coal and fuel_cost_gas (EUR/GJ).
    """
    path = Path(path)
    parser = _parser(path)
    section = "context" if parser.has_section("context") else parser.sections()[0] if parser.sections() else None
    if section is None:
        raise ConfigError(f"{path}: expected a [context] section")

    def need(key: str) -> float:
        value = _get(parser, section, key, required=True)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{path}: {key} must be a number, got {value!r}") from None

    plants = {}
    for name in _PLANT_KEYS:
        fuel = "coal" if name.startswith("coal") else "gas"
        plants[name] = PlantParams(
            fuel=fuel,
            efficiency=need(f"{name}.efficiency"),
            emission_factor=need(f"{name}.emission_factor"),
        )
    return SwitchContext(
        coal_efficient=plants["coal_efficient"],
        coal_inefficient=plants["coal_inefficient"],
        gas_efficient=plants["gas_efficient"],
        gas_inefficient=plants["gas_inefficient"],
        fuel_cost_coal=need("fuel_cost_coal"),
        fuel_cost_gas=need("fuel_cost_gas"),
    )


def config_hash(text: str) -> str:
    """Stable digest of a config file's exact contents."""
    return hashlib.sha256(text.encode()).hexdigest()[:16]
