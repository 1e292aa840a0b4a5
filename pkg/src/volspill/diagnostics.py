"""Descriptive statistics and the time-series test battery.

Implements the moment summaries, Jarque-Bera, Ljung-Box, ARCH-LM and the
ADF/Phillips-Perron unit-root tests. Kurtosis is reported raw (non-excess),
skewness and kurtosis use 1/n central moments, and unit-root p-values come
from response-surface constants embedded below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import (
    SampleTooShort,
    SingularRegression,
    TooFewObservations,
    TooManyLags,
    ZeroVariance,
)

__all__ = [
    "SummaryStats",
    "TestResult",
    "summary_stats",
    "jarque_bera",
    "ljung_box",
    "arch_lm",
    "adf_test",
    "pp_test",
    "LJUNG_BOX_CHI2_20_CRIT_5PCT",
    "ADF_CRITICAL_VALUES",
]

SIGNIFICANCE_LEVELS = (0.01, 0.05, 0.10)

# 5% chi-square critical value at 20 degrees of freedom, as used for the
# Q(20)/Q2(20)/ARCH-LM(20) summaries.
LJUNG_BOX_CHI2_20_CRIT_5PCT = 31.41

# Dickey-Fuller tau critical values per deterministic specification.
ADF_CRITICAL_VALUES = {
    "none": {0.01: -2.58, 0.05: -1.95, 0.10: -1.62},
    "constant": {0.01: -3.44, 0.05: -2.87, 0.10: -2.57},
    "trend": {0.01: -3.96, 0.05: -3.41, 0.10: -3.13},
}

# Response-surface coefficients for the asymptotic tau distribution
# (single-series case). p = Phi(poly(tau)); the cubic applies right of the
# switch point, the quadratic left of it.
_TAU_SWITCH = {"none": -1.04, "constant": -1.61, "trend": -2.89}
_TAU_MIN = {"none": -19.04, "constant": -18.83, "trend": -16.18}
_TAU_MAX = {"none": math.inf, "constant": 2.74, "trend": 0.70}
_TAU_SMALLP = {
    "none": (0.6344, 1.2378, 0.032496),
    "constant": (2.1659, 1.4412, 0.038269),
    "trend": (3.2512, 1.6047, 0.049588),
}
_TAU_LARGEP = {
    "none": (0.4797, 0.93557, -0.06999, 0.033066),
    "constant": (1.7339, 0.93202, -0.12745, -0.010368),
    "trend": (2.5261, 0.61654, -0.37956, -0.060285),
}


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    median: float
    max: float
    min: float
    std_dev: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class TestResult:
    """Statistic, p-value and per-level rejection flags for one test."""

    name: str
    statistic: float
    p_value: float
    lags_or_df: int
    reject_at: dict = field(default_factory=dict)
    critical_values: Optional[dict] = None

    def __post_init__(self) -> None:
        if not self.reject_at:
            object.__setattr__(
                self,
                "reject_at",
                {lvl: bool(self.p_value < lvl) for lvl in SIGNIFICANCE_LEVELS},
            )


def _clean(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite values")
    return arr


def summary_stats(x) -> SummaryStats:
    """Moment summary; skewness m3/m2^1.5 and raw kurtosis m4/m2^2."""
    arr = _clean(x)
    n = arr.size
    if n < 4:
        raise TooFewObservations(f"need at least 4 observations, got {n}")
    centered = arr - arr.mean()
    m2 = float(np.mean(centered**2))
    if m2 <= 0.0:
        raise ZeroVariance("skewness/kurtosis undefined for a constant sequence")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return SummaryStats(
        n=n,
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        max=float(arr.max()),
        min=float(arr.min()),
        std_dev=float(math.sqrt(m2 * n / (n - 1))),
        skewness=m3 / m2**1.5,
        kurtosis=m4 / m2**2,
    )


def jarque_bera(x) -> TestResult:
    """Normality test n/6*(S^2 + (K-3)^2/4) against chi-square(2)."""
    arr = _clean(x)
    if arr.size < 8:
        raise TooFewObservations(f"need at least 8 observations, got {arr.size}")
    s = summary_stats(arr)
    stat = _jb_statistic(s.n, s.skewness, s.kurtosis)
    return TestResult("jarque_bera", stat, float(stats.chi2.sf(stat, 2)), 2)


def _jb_statistic(n: int, skewness: float, kurtosis: float) -> float:
    return n / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)


def _autocorrelations(x: np.ndarray, lags: int) -> np.ndarray:
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom <= 0.0:
        raise ZeroVariance("autocorrelation undefined for a constant sequence")
    return np.array(
        [float(centered[j:] @ centered[:-j]) / denom for j in range(1, lags + 1)]
    )


def ljung_box(x, lags: int = 20, squared: bool = False) -> TestResult:
    """Q statistic over the first `lags` autocorrelations; chi-square(lags) p-value.

    With squared=True the series is centered first and then squared, testing
    for ARCH-type dependence.
    """
    arr = _clean(x)
    n = arr.size
    if lags >= n / 2:
        raise TooManyLags(f"lags={lags} too large for n={n}")
    if squared:
        arr = (arr - arr.mean()) ** 2
    rho = _autocorrelations(arr, lags)
    q = n * (n + 2.0) * float(np.sum(rho**2 / (n - np.arange(1, lags + 1))))
    crit = {lvl: float(stats.chi2.ppf(1.0 - lvl, lags)) for lvl in SIGNIFICANCE_LEVELS}
    name = "ljung_box_squared" if squared else "ljung_box"
    return TestResult(name, q, float(stats.chi2.sf(q, lags)), lags, critical_values=crit)


def arch_lm(x, lags: int = 20) -> TestResult:
    """Lagrange-multiplier test: T*R^2 from regressing x_t^2 on its own lags."""
    arr = _clean(x)
    n = arr.size
    if lags >= n / 2:
        raise TooManyLags(f"lags={lags} too large for n={n}")
    sq = (arr - arr.mean()) ** 2
    y = sq[lags:]
    design = np.column_stack(
        [np.ones(n - lags)] + [sq[lags - j : n - j] for j in range(1, lags + 1)]
    )
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise SingularRegression("auxiliary ARCH regression is rank deficient")
    resid = y - design @ coef
    tss = float(np.sum((y - y.mean()) ** 2))
    if tss <= 0.0:
        raise SingularRegression("squared series has no variation")
    r2 = 1.0 - float(resid @ resid) / tss
    stat = y.size * r2
    return TestResult("arch_lm", stat, float(stats.chi2.sf(stat, lags)), lags)


# -- unit-root tests -----------------------------------------------------------


def _tau_pvalue(tau: float, spec: str) -> float:
    if tau > _TAU_MAX[spec]:
        return 1.0
    if tau < _TAU_MIN[spec]:
        return 0.0
    coeffs = _TAU_SMALLP[spec] if tau <= _TAU_SWITCH[spec] else _TAU_LARGEP[spec]
    z = sum(c * tau**i for i, c in enumerate(coeffs))
    return float(stats.norm.cdf(z))


def _deterministic_terms(n: int, spec: str) -> list[np.ndarray]:
    if spec == "none":
        return []
    if spec == "constant":
        return [np.ones(n)]
    if spec == "trend":
        return [np.ones(n), np.arange(1.0, n + 1.0)]
    raise ValueError(f"unknown spec {spec!r}; use none|constant|trend")


def _ols(y: np.ndarray, x: np.ndarray):
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise SingularRegression("unit-root regression design is rank deficient")
    resid = y - x @ coef
    dof = y.size - x.shape[1]
    if dof <= 0:
        raise SampleTooShort("no residual degrees of freedom")
    s2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(x.T @ x)
    se = np.sqrt(s2 * np.diag(xtx_inv))
    return coef, se, resid, s2


def _unitroot_result(name: str, tau: float, spec: str, lags: int) -> TestResult:
    p_value = _tau_pvalue(tau, spec)
    crit = dict(ADF_CRITICAL_VALUES[spec])
    return TestResult(name, tau, p_value, lags, critical_values=crit)


def adf_test(x, max_lag: Optional[int] = None, spec: str = "constant") -> TestResult:
    """Augmented Dickey-Fuller t-test on the lagged level.

    The augmentation lag is chosen by AIC over 0..max_lag on a common
    estimation sample (default max_lag: Schwert's 12*(n/100)^(1/4) rule). The
    statistic is compared against the embedded tau response surface; the
    critical values for the chosen specification ride along on the result.
    """
    arr = _clean(x)
    n = arr.size
    if max_lag is None:
        max_lag = min(int(math.ceil(12.0 * (n / 100.0) ** 0.25)), n // 2 - 2)
    if n <= max_lag + 10:
        raise SampleTooShort(f"need n > max_lag + 10; n={n}, max_lag={max_lag}")
    dx = np.diff(arr)
    if float(np.var(dx)) <= 0.0:
        raise ZeroVariance("series is constant")

    def regression(lag: int, offset: int):
        # rows t = offset..len(dx)-1 of: dx_t ~ det + level_{t-1} + dx_{t-1..t-lag}
        y = dx[offset:]
        cols = [arr[offset:-1]]
        cols += [dx[offset - j : len(dx) - j] for j in range(1, lag + 1)]
        cols += _deterministic_terms(y.size, spec)
        return y, np.column_stack(cols)

    best_lag, best_aic = 0, math.inf
    for lag in range(0, max_lag + 1):
        y, design = regression(lag, max_lag)
        _, _, resid, _ = _ols(y, design)
        ssr = float(resid @ resid)
        aic = y.size * math.log(ssr / y.size) + 2.0 * design.shape[1]
        if aic < best_aic - 1e-12:
            best_aic, best_lag = aic, lag
    y, design = regression(best_lag, best_lag)
    coef, se, _, _ = _ols(y, design)
    tau = float(coef[0] / se[0])
    return _unitroot_result("adf", tau, spec, best_lag)


def _newey_west_variance(u: np.ndarray, bandwidth: int) -> float:
    n = u.size
    gamma0 = float(u @ u) / n
    lam2 = gamma0
    for j in range(1, bandwidth + 1):
        gamma_j = float(u[j:] @ u[:-j]) / n
        lam2 += 2.0 * (1.0 - j / (bandwidth + 1.0)) * gamma_j
    return lam2


def pp_test(x, spec: str = "constant", bandwidth: Optional[int] = None) -> TestResult:
    """Phillips-Perron Z-tau test with a Newey-West long-run variance correction.

    Default bandwidth is the integer part of 4*(n/100)^(2/9); pass bandwidth
    explicitly to override.
    """
    arr = _clean(x)
    n = arr.size
    if n < 15:
        raise SampleTooShort(f"need at least 15 observations, got {n}")
    if float(np.var(np.diff(arr))) <= 0.0:
        raise ZeroVariance("series is constant")
    y = arr[1:]
    cols = [arr[:-1]] + _deterministic_terms(n - 1, spec)
    design = np.column_stack(cols)
    coef, se, resid, s2 = _ols(y, design)
    nobs = y.size
    if bandwidth is None:
        bandwidth = int(4.0 * (nobs / 100.0) ** (2.0 / 9.0))
    gamma0 = float(resid @ resid) / nobs
    lam2 = _newey_west_variance(resid, bandwidth)
    if lam2 <= 0.0:
        raise ZeroVariance("long-run variance estimate is non-positive")
    lam = math.sqrt(lam2)
    rho, sigma = float(coef[0]), float(se[0])
    t_rho = (rho - 1.0) / sigma
    tau = math.sqrt(gamma0 / lam2) * t_rho - 0.5 * ((lam2 - gamma0) / lam) * (
        nobs * sigma / math.sqrt(s2)
    )
    return _unitroot_result("pp", tau, spec, bandwidth)
