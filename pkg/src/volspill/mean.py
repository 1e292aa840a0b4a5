"""Conditional-mean filtering: per-series ARMA and joint VAR estimation.

Both estimators condition pre-sample values on zero, so residual panels keep
the full sample length. ARMA estimation is Gaussian conditional sum of
squares with the MA polynomial kept invertible by reparameterization; the AR
polynomial is checked for stationarity but not constrained.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import arma_css_residuals
from ._numopt import minimize_restarts, opg_standard_errors
from .data import ReturnSeries
from .errors import (
    NonConvergence,
    NonInvertibleMA,
    SampleTooShort,
    SingularDesign,
)

__all__ = [
    "ArmaSpec",
    "MeanFit",
    "ResidualSeries",
    "fit_var",
    "select_var_order",
    "fit_arma",
    "select_arma_order",
]

MAX_ORDER = 7


@dataclass(frozen=True)
class ResidualSeries:
    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    values: np.ndarray  # (T, k)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if not np.all(np.isfinite(values)):
            raise ValueError("residuals must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ArmaSpec:
    ar_order: int = 0
    ma_order: int = 0
    include_constant: bool = True

    def __post_init__(self) -> None:
        if self.ar_order < 0 or self.ma_order < 0:
            raise ValueError("orders must be non-negative")
        if self.ar_order > MAX_ORDER or self.ma_order > MAX_ORDER:
            raise ValueError(f"orders above {MAX_ORDER} are not supported")


@dataclass(frozen=True)
class MeanFit:
    """Fitted conditional-mean model with full-length residuals."""

    kind: str  # "arma" | "var"
    spec: object  # ArmaSpec or int (VAR order)
    const: np.ndarray
    ar: tuple  # ARMA: 1-d array; VAR: tuple of (k, k) matrices
    ma: tuple
    residuals: ResidualSeries
    loglik: float
    aic: float
    bic: float
    sigma2: float | np.ndarray
    ar_stationary: bool
    std_errors: Optional[np.ndarray] = None


def _lagged_design(values: np.ndarray, p: int) -> np.ndarray:
    """Intercept plus p zero-padded lags of every column."""
    t, k = values.shape
    cols = [np.ones(t)]
    for lag in range(1, p + 1):
        block = np.zeros((t, k))
        block[lag:, :] = values[:-lag, :]
        cols.append(block)
    return np.column_stack(cols)


def fit_var(r: ReturnSeries, p: int) -> MeanFit:
    """Equation-by-equation least squares for a VAR(p) with intercept."""
    values = np.atleast_2d(np.asarray(r.values, dtype=float))
    t, k = values.shape
    if p < 0:
        raise ValueError("order must be non-negative")
    if t <= k * p + 10:
        raise SampleTooShort(f"need T > k*p + 10; T={t}, k={k}, p={p}")
    design = _lagged_design(values, p)
    coef, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < design.shape[1]:
        raise SingularDesign("VAR design matrix is rank deficient")
    resid = values - design @ coef
    sigma = resid.T @ resid / t
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise SingularDesign("residual covariance is singular")
    n_params = k * k * p + k
    loglik = -0.5 * t * (k * math.log(2.0 * math.pi) + logdet + k)
    const = coef[0, :].copy()
    lags = tuple(coef[1 + j * k : 1 + (j + 1) * k, :].T.copy() for j in range(p))
    companion_stable = _var_stationary(lags, k)
    return MeanFit(
        kind="var",
        spec=p,
        const=const,
        ar=lags,
        ma=(),
        residuals=ResidualSeries(r.dates, r.assets, resid),
        loglik=loglik,
        aic=logdet + 2.0 * n_params / t,
        bic=logdet + math.log(t) * n_params / t,
        sigma2=sigma,
        ar_stationary=companion_stable,
    )


def _var_stationary(lags: Sequence[np.ndarray], k: int) -> bool:
    p = len(lags)
    if p == 0:
        return True
    companion = np.zeros((k * p, k * p))
    for j, mat in enumerate(lags):
        companion[:k, j * k : (j + 1) * k] = mat
    if p > 1:
        companion[k:, :-k] = np.eye(k * (p - 1))
    return bool(np.max(np.abs(np.linalg.eigvals(companion))) < 1.0)


def select_var_order(r: ReturnSeries, p_max: int, criterion: str = "aic") -> int:
    """Order in 0..p_max minimizing the information criterion (ties go low)."""
    if p_max < 0:
        raise ValueError("p_max must be non-negative")
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    best_p, best_value = 0, math.inf
    for p in range(p_max + 1):
        fit = fit_var(r, p)
        value = fit.aic if criterion == "aic" else fit.bic
        if value < best_value - 1e-12:
            best_value, best_p = value, p
    return best_p


def _ma_from_partials(theta: np.ndarray) -> np.ndarray:
    """Monahan map from unconstrained values to an invertible MA polynomial."""
    partials = np.tanh(theta / 2.0)
    q = partials.size
    coeffs = partials.copy()
    for j in range(1, q):
        new = coeffs[: j].copy()
        for i in range(j):
            new[i] += partials[j] * coeffs[j - 1 - i]
        coeffs[:j] = new
    return coeffs


def _ma_invertible(ma: np.ndarray) -> bool:
    coeffs = np.concatenate(([1.0], ma))
    # trailing near-zero coefficients make the companion matrix ill-conditioned
    keep = np.nonzero(np.abs(coeffs) > 1e-10)[0]
    if keep.size <= 1:
        return True
    roots = np.roots(coeffs[: keep[-1] + 1][::-1])
    return bool(np.all(np.abs(roots) > 1.0 - 1e-8))


def fit_arma(x, spec: ArmaSpec, dates: Optional[tuple] = None, name: str = "series") -> MeanFit:
    """Conditional-sum-of-squares Gaussian estimate of an ARMA(p, q)."""
    arr = np.asarray(x, dtype=float).ravel()
    t = arr.size
    p, q = spec.ar_order, spec.ma_order
    if t <= 10 * (p + q + 1):
        raise SampleTooShort(f"need T > 10*(p+q+1); T={t}")

    use_const = spec.include_constant

    def unpack(theta: np.ndarray):
        idx = 0
        const = theta[idx] if use_const else 0.0
        idx += int(use_const)
        ar = theta[idx : idx + p]
        idx += p
        ma = _ma_from_partials(theta[idx : idx + q]) if q else np.empty(0)
        return float(const), np.asarray(ar, dtype=float), ma

    def css(theta: np.ndarray) -> float:
        const, ar, ma = unpack(theta)
        e = arma_css_residuals(arr, const, ar, ma)
        return float(e @ e)

    theta0 = _arma_start(arr, p, q, use_const)
    if theta0.size == 0:
        theta_hat, converged, status = np.empty(0), True, ""
    else:
        theta_hat, _, converged, status = minimize_restarts(css, [theta0])
        if theta_hat is None:
            raise NonConvergence(f"ARMA estimation failed: {status}")
    const, ar, ma = unpack(theta_hat)
    if not _ma_invertible(ma):
        raise NonInvertibleMA("estimated MA polynomial has roots on/inside the unit circle")
    e = arma_css_residuals(arr, const, ar, ma)
    sigma2 = float(e @ e) / t
    loglik = -0.5 * t * (math.log(2.0 * math.pi) + math.log(sigma2) + 1.0)
    n_params = p + q + int(use_const) + 1  # + variance
    dates = dates if dates is not None else tuple(range(t))

    def per_obs(params: np.ndarray) -> np.ndarray:
        c = params[0] if use_const else 0.0
        a = params[int(use_const) : int(use_const) + p]
        m = params[int(use_const) + p :]
        resid = arma_css_residuals(arr, float(c), np.asarray(a), np.asarray(m))
        return -0.5 * (math.log(2.0 * math.pi * sigma2) + resid**2 / sigma2)

    natural = np.concatenate(
        [np.array([const]) if use_const else np.empty(0), ar, ma]
    )
    se = opg_standard_errors(per_obs, natural) if natural.size else None
    stationary = p == 0 or bool(np.all(np.abs(np.roots(np.concatenate(([1.0], -ar))[::-1])) > 1.0))
    fit = MeanFit(
        kind="arma",
        spec=spec,
        const=np.array([const]),
        ar=ar,
        ma=ma,
        residuals=ResidualSeries(tuple(dates), (name,), e[:, None]),
        loglik=loglik,
        aic=-2.0 * loglik + 2.0 * n_params,
        bic=-2.0 * loglik + math.log(t) * n_params,
        sigma2=sigma2,
        ar_stationary=stationary,
        std_errors=se,
    )
    if not converged:
        raise NonConvergence("ARMA optimizer did not converge", best=fit, status=status)
    return fit


def _arma_start(arr: np.ndarray, p: int, q: int, use_const: bool) -> np.ndarray:
    """OLS autoregression start; MA partials start at zero."""
    parts = []
    if use_const:
        parts.append(np.array([arr.mean()]))
    if p:
        design = _lagged_design(arr[:, None], p)
        coef, _, _, _ = np.linalg.lstsq(design, arr, rcond=None)
        ar0 = coef[1:]
        # keep the start comfortably inside the stationary region
        scale = np.sum(np.abs(ar0))
        if scale >= 0.95:
            ar0 = ar0 * (0.95 / scale)
        parts.append(ar0)
    if q:
        parts.append(np.zeros(q))
    return np.concatenate(parts) if parts else np.empty(0)


def select_arma_order(
    x,
    max_ar: int = 2,
    max_ma: int = 2,
    criterion: str = "aic",
    include_constant: bool = True,
) -> ArmaSpec:
    """Grid search over (p, q); ties resolved toward the smaller model."""
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    best_spec, best_value = None, math.inf
    for total in range(max_ar + max_ma + 1):
        for p in range(min(total, max_ar) + 1):
            q = total - p
            if q > max_ma:
                continue
            spec = ArmaSpec(p, q, include_constant)
            try:
                fit = fit_arma(x, spec)
            except (NonConvergence, SampleTooShort):
                continue
            value = fit.aic if criterion == "aic" else fit.bic
            if value < best_value - 1e-12:
                best_value, best_spec = value, spec
    if best_spec is None:
        raise NonConvergence("no ARMA specification could be estimated")
    return best_spec
