"""volspill: conditional-volatility and dynamic-correlation toolkit for daily
price panels, with fuel-switching economics for coal/gas/carbon portfolios.
"""

__version__ = "0.1.0"

from .data import CrisisWindow, PriceFrame, ReturnSeries, align_common_days, load_prices, log_returns
from .diagnostics import (
    SummaryStats,
    TestResult,
    adf_test,
    arch_lm,
    jarque_bera,
    ljung_box,
    pp_test,
    summary_stats,
)
from .mean import ArmaSpec, MeanFit, fit_arma, fit_var, select_arma_order, select_var_order
from .garch import GarchParams, GarchSpec, UnivariateFit, fit_garch, garch_filter, standardized_residuals
from .correlation import (
    AgdccFit,
    CccFit,
    DccFit,
    StdResidualPanel,
    assemble_covariance,
    dcc_filter,
    dcc_loglik,
    fit_ccc,
    fit_dcc,
    fit_gdcc,
    generalized_filter,
    summarize_dcc,
    unconditional_corr,
)
from .switching import (
    PlantParams,
    Regime,
    SwitchContext,
    classify_regime,
    marginal_cost,
    marginal_cost_variance,
    switch_price_lower,
    switch_price_upper,
)
from .simulate import Dgp, RecoveryReport, SimResult, recovery_study, simulate

__all__ = [
    "__version__",
    "PriceFrame",
    "ReturnSeries",
    "CrisisWindow",
    "load_prices",
    "align_common_days",
    "log_returns",
    "SummaryStats",
    "TestResult",
    "summary_stats",
    "jarque_bera",
    "ljung_box",
    "arch_lm",
    "adf_test",
    "pp_test",
    "ArmaSpec",
    "MeanFit",
    "fit_arma",
    "fit_var",
    "select_arma_order",
    "select_var_order",
    "GarchSpec",
    "GarchParams",
    "UnivariateFit",
    "garch_filter",
    "fit_garch",
    "standardized_residuals",
    "StdResidualPanel",
    "CccFit",
    "DccFit",
    "AgdccFit",
    "unconditional_corr",
    "fit_ccc",
    "dcc_filter",
    "dcc_loglik",
    "fit_dcc",
    "fit_gdcc",
    "generalized_filter",
    "assemble_covariance",
    "summarize_dcc",
    "PlantParams",
    "SwitchContext",
    "Regime",
    "marginal_cost",
    "marginal_cost_variance",
    "switch_price_upper",
    "switch_price_lower",
    "classify_regime",
    "Dgp",
    "SimResult",
    "RecoveryReport",
    "simulate",
    "recovery_study",
]
