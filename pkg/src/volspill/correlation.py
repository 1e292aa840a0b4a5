"""Constant and dynamic conditional-correlation models on standardized residuals.

Four specifications: constant correlation (the benchmark), the scalar
news/decay recursion, its generalized form with asset-specific diagonal
loadings, and the asymmetric generalization adding a negative-shock term.
Estimation is two-stage quasi-maximum likelihood with correlation targeting:
the unconditional moments are fixed at their sample values and only the
dynamics parameters are optimized.

Likelihood convention: `CccFit.loglik`, `DccFit.loglik` and `AgdccFit.loglik`
are evaluated on the standardized panel with unit conditional variances
(the volatility-stage term is constant at that point); `dcc_loglik` computes
the full two-stage value when the variance paths are supplied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import dcc_q_path, generalized_q_path
from ._numopt import budget_forward, budget_inverse, minimize_restarts, opg_standard_errors
from .data import CrisisWindow
from .errors import (
    EmptyWindow,
    InterceptNotPSD,
    InvalidParams,
    NonConvergence,
    NonPositiveDefiniteR,
    SampleTooShort,
    ZeroVariance,
)

__all__ = [
    "StdResidualPanel",
    "CccFit",
    "DccFit",
    "AgdccFit",
    "DccSummary",
    "BoundarySolutionWarning",
    "unconditional_corr",
    "fit_ccc",
    "dcc_filter",
    "dcc_loglik",
    "fit_dcc",
    "fit_gdcc",
    "generalized_filter",
    "assemble_covariance",
    "summarize_dcc",
    "q_update_direct",
    "q_update_rearranged",
]

LOG_2PI = math.log(2.0 * math.pi)


class BoundarySolutionWarning(UserWarning):
    """Correlation dynamics estimated at (or numerically on) a boundary."""


@dataclass(frozen=True)
class StdResidualPanel:
    """T x k panel of standardized residuals from the volatility stage."""

    dates: tuple
    assets: tuple[str, ...]
    values: np.ndarray
    source: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] < 2:
            raise ValueError("panel must be T x k with k >= 2")
        if values.shape[0] != len(self.dates):
            raise ValueError("row count does not match dates")
        if not np.all(np.isfinite(values)):
            raise ValueError("standardized residuals must be finite")
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_fits(cls, fits: Sequence, dates: tuple) -> "StdResidualPanel":
        values = np.column_stack([f.std_residuals for f in fits])
        names = tuple(f.name for f in fits)
        return cls(dates, names, values, source=names)

    def pair(self, i, j) -> "StdResidualPanel":
        ii, jj = self._resolve(i), self._resolve(j)
        return StdResidualPanel(
            self.dates,
            (self.assets[ii], self.assets[jj]),
            self.values[:, [ii, jj]],
            source=(self.assets[ii], self.assets[jj]),
        )

    def _resolve(self, key) -> int:
        if isinstance(key, str):
            return self.assets.index(key)
        return int(key)


@dataclass(frozen=True)
class CccFit:
    R: np.ndarray
    loglik: float
    assets: tuple[str, ...] = ()


@dataclass(frozen=True)
class DccFit:
    alpha: np.ndarray  # news coefficients, one per lag
    beta: np.ndarray  # decay coefficients, one per lag
    Qbar: np.ndarray
    R_path: np.ndarray
    loglik: float
    Q_path: Optional[np.ndarray] = None
    std_errors: Optional[np.ndarray] = None
    converged: bool = True
    boundary: bool = False
    dates: tuple = ()
    assets: tuple[str, ...] = ()

    @property
    def alpha_total(self) -> float:
        return float(np.sum(self.alpha))

    @property
    def beta_total(self) -> float:
        return float(np.sum(self.beta))

    @property
    def persistence(self) -> float:
        return self.alpha_total + self.beta_total


@dataclass(frozen=True)
class AgdccFit:
    A: np.ndarray  # diagonal news loadings, one per asset
    B: np.ndarray  # diagonal decay loadings
    G: np.ndarray  # diagonal negative-shock loadings (zero when symmetric)
    Qbar: np.ndarray
    Nbar: np.ndarray
    R_path: np.ndarray
    loglik: float
    asymmetric: bool = False
    converged: bool = True
    dates: tuple = ()
    assets: tuple[str, ...] = ()


@dataclass(frozen=True)
class WindowStats:
    label: str
    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class DccSummary:
    pair: tuple[str, str]
    rows: tuple[WindowStats, ...]


def unconditional_corr(xi: StdResidualPanel | np.ndarray) -> np.ndarray:
    """Sample correlation matrix of the panel columns."""
    values = xi.values if isinstance(xi, StdResidualPanel) else np.asarray(xi, dtype=float)
    t, k = values.shape
    if t <= k:
        raise ValueError(f"need more observations than assets; T={t}, k={k}")
    centered = values - values.mean(axis=0)
    sd = centered.std(axis=0)
    if np.any(sd <= 0.0):
        col = int(np.argmin(sd))
        raise ZeroVariance(f"column {col} has zero variance")
    corr = (centered / sd).T @ (centered / sd) / t
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr


def _corr_loglik_terms(values: np.ndarray, r_path: np.ndarray) -> np.ndarray:
    """Per-observation -(1/2)(k log 2pi + log|R_t| + xi' R_t^-1 xi)."""
    t, k = values.shape
    if k == 2:
        rho = r_path[:, 0, 1]
        det = 1.0 - rho**2
        if np.any(det <= 0.0):
            raise NonPositiveDefiniteR(int(np.argmax(det <= 0.0)))
        x1, x2 = values[:, 0], values[:, 1]
        quad = (x1**2 + x2**2 - 2.0 * rho * x1 * x2) / det
        return -0.5 * (k * LOG_2PI + np.log(det) + quad)
    try:
        chol = np.linalg.cholesky(r_path)
    except np.linalg.LinAlgError:
        raise NonPositiveDefiniteR(_first_non_pd(r_path)) from None
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2)), axis=1)
    solved = np.linalg.solve(chol, values[:, :, None])[:, :, 0]
    quad = np.sum(solved**2, axis=1)
    return -0.5 * (k * LOG_2PI + logdet + quad)


def _first_non_pd(r_path: np.ndarray) -> int:
    for t in range(r_path.shape[0]):
        try:
            np.linalg.cholesky(r_path[t])
        except np.linalg.LinAlgError:
            return t
    return -1


def fit_ccc(xi: StdResidualPanel) -> CccFit:
    """Constant-correlation benchmark: R is the sample correlation of xi."""
    r = unconditional_corr(xi)
    r_path = np.broadcast_to(r, (xi.n_obs, xi.k, xi.k))
    loglik = float(np.sum(_corr_loglik_terms(xi.values, r_path)))
    return CccFit(R=r, loglik=loglik, assets=xi.assets)


def _normalize_q(q_path: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diagonal(q_path, axis1=1, axis2=2))
    r = q_path / (d[:, :, None] * d[:, None, :])
    idx = np.arange(q_path.shape[1])
    r[:, idx, idx] = 1.0
    return r


def dcc_filter(
    xi: StdResidualPanel | np.ndarray,
    alpha,
    beta,
    Qbar: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the scalar news/decay recursion and rescale to correlations.

    alpha and beta may be scalars or per-lag sequences; missing pre-sample
    terms backcast to Qbar, so Q_1 = Qbar. Returns (Q_path, R_path).
    """
    values = xi.values if isinstance(xi, StdResidualPanel) else np.asarray(xi, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(alpha < 0.0) or np.any(beta < 0.0):
        raise InvalidParams("news and decay coefficients must be non-negative")
    if alpha.sum() + beta.sum() >= 1.0:
        raise InvalidParams(
            f"persistence {alpha.sum() + beta.sum():.6f} must be below 1"
        )
    qbar = unconditional_corr(values) if Qbar is None else np.asarray(Qbar, dtype=float)
    q_path = dcc_q_path(values, qbar, alpha, beta)
    return q_path, _normalize_q(q_path)


def dcc_loglik(xi, r_path: np.ndarray, d_path: Optional[np.ndarray] = None) -> float:
    """Gaussian log-likelihood of the joint model.

    d_path holds the conditional standard deviations (T x k) from the
    volatility stage; omit it (or pass ones) for the standardized-panel value.
    """
    values = xi.values if isinstance(xi, StdResidualPanel) else np.asarray(xi, dtype=float)
    terms = _corr_loglik_terms(values, r_path)
    total = float(np.sum(terms))
    if d_path is not None:
        d = np.asarray(d_path, dtype=float)
        if d.shape != values.shape:
            raise ValueError("d_path must match the panel shape")
        total -= float(np.sum(np.log(d)))
    return total


_DCC_STARTS = ((0.02, 0.95), (0.05, 0.90), (0.01, 0.97), (1e-8, 1e-8))


def fit_dcc(xi: StdResidualPanel, p: int = 1, q: int = 1) -> DccFit:
    """Two-stage QMLE of the scalar dynamics with correlation targeting.

    Qbar is fixed at the sample correlation; the news/decay coefficients are
    optimized over a transform enforcing non-negativity and persistence < 1.
    Degenerate optima on the boundary are reported with a warning, not
    suppressed.
    """
    if xi.n_obs < 250:
        raise SampleTooShort(f"need at least 250 observations, got {xi.n_obs}")
    if p < 1 or q < 0:
        raise ValueError("need p >= 1 and q >= 0")
    values = xi.values
    t = values.shape[0]
    qbar = unconditional_corr(values)
    weights = np.ones(p + q)

    def split(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        comps = budget_forward(theta, weights)
        return comps[:p], comps[p:]

    def objective(theta: np.ndarray) -> float:
        alpha, beta = split(theta)
        q_path = dcc_q_path(values, qbar, alpha, beta)
        try:
            terms = _corr_loglik_terms(values, _normalize_q(q_path))
        except NonPositiveDefiniteR:
            return 1e10
        return -float(np.sum(terms)) / t

    starts = []
    for a0, b0 in _DCC_STARTS:
        comps = np.concatenate([np.full(p, a0 / p), np.full(q, b0 / q) if q else []])
        starts.append(budget_inverse(comps, weights))
    theta_hat, _, converged, status = minimize_restarts(objective, starts)
    if theta_hat is None:
        raise NonConvergence(f"DCC estimation failed: {status}")
    alpha, beta = split(theta_hat)
    q_path = dcc_q_path(values, qbar, alpha, beta)
    r_path = _normalize_q(q_path)
    loglik = float(np.sum(_corr_loglik_terms(values, r_path)))

    def per_obs(raw: np.ndarray) -> np.ndarray:
        qp = dcc_q_path(values, qbar, raw[:p], raw[p:])
        return _corr_loglik_terms(values, _normalize_q(qp))

    se = opg_standard_errors(per_obs, np.concatenate([alpha, beta]))
    boundary = bool(
        alpha.sum() < 1e-6
        or alpha.sum() + beta.sum() > 1.0 - 1e-6
        or alpha.sum() + beta.sum() < 1e-4
    )
    if boundary:
        warnings.warn(
            f"correlation dynamics at a boundary (alpha={alpha.sum():.2e}, "
            f"alpha+beta={alpha.sum() + beta.sum():.6f})",
            BoundarySolutionWarning,
            stacklevel=2,
        )
    fit = DccFit(
        alpha=alpha,
        beta=beta,
        Qbar=qbar,
        R_path=r_path,
        Q_path=q_path,
        loglik=loglik,
        std_errors=se,
        converged=converged,
        boundary=boundary,
        dates=xi.dates,
        assets=xi.assets,
    )
    if not converged:
        raise NonConvergence("DCC optimizer did not converge", best=fit, status=status)
    return fit


# -- generalized / asymmetric dynamics -----------------------------------------


def q_update_direct(
    qbar: np.ndarray,
    nbar: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    g: np.ndarray,
    xi_prev: np.ndarray,
    q_prev: np.ndarray,
) -> np.ndarray:
    """One recursion step written with explicit diagonal matrix products."""
    A, B, G = np.diag(a), np.diag(b), np.diag(g)
    n_prev = np.minimum(xi_prev, 0.0)
    intercept = qbar - A.T @ qbar @ A - B.T @ qbar @ B - G.T @ nbar @ G
    return (
        intercept
        + A.T @ np.outer(xi_prev, xi_prev) @ A
        + B.T @ q_prev @ B
        + G.T @ np.outer(n_prev, n_prev) @ G
    )


def q_update_rearranged(
    qbar: np.ndarray,
    nbar: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    g: np.ndarray,
    xi_prev: np.ndarray,
    q_prev: np.ndarray,
) -> np.ndarray:
    """Same step via elementwise loading arrays (the production form)."""
    a2, b2, g2 = np.outer(a, a), np.outer(b, b), np.outer(g, g)
    n_prev = np.minimum(xi_prev, 0.0)
    return (
        (1.0 - a2 - b2) * qbar
        + a2 * np.outer(xi_prev, xi_prev)
        + b2 * q_prev
        + g2 * (np.outer(n_prev, n_prev) - nbar)
    )


def _generalized_intercept(
    qbar: np.ndarray, nbar: np.ndarray, a: np.ndarray, b: np.ndarray, g: np.ndarray
) -> np.ndarray:
    return qbar - np.outer(a, a) * qbar - np.outer(b, b) * qbar - np.outer(g, g) * nbar


def generalized_filter(
    xi: StdResidualPanel | np.ndarray,
    a,
    b,
    g=None,
    Qbar: Optional[np.ndarray] = None,
    Nbar: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Order-one recursion with per-asset diagonal loadings; returns (Q, R) paths."""
    values = xi.values if isinstance(xi, StdResidualPanel) else np.asarray(xi, dtype=float)
    k = values.shape[1]
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    g = np.zeros(k) if g is None else np.asarray(g, dtype=float)
    if a.shape != (k,) or b.shape != (k,) or g.shape != (k,):
        raise InvalidParams("loadings must be one value per asset")
    if np.any(a < 0.0) or np.any(b < 0.0) or np.any(g < 0.0):
        raise InvalidParams("diagonal loadings must be non-negative")
    if np.any(a**2 + b**2 >= 1.0):
        raise InvalidParams("need a_i^2 + b_i^2 < 1 per asset")
    neg = np.minimum(values, 0.0)
    qbar = unconditional_corr(values) if Qbar is None else np.asarray(Qbar, dtype=float)
    nbar = neg.T @ neg / values.shape[0] if Nbar is None else np.asarray(Nbar, dtype=float)
    intercept = _generalized_intercept(qbar, nbar, a, b, g)
    q_path = generalized_q_path(
        values, neg, intercept, np.outer(a, a), np.outer(b, b), np.outer(g, g), qbar
    )
    return q_path, _normalize_q(q_path)


def fit_gdcc(xi: StdResidualPanel, asymmetric: bool = False) -> AgdccFit:
    """QMLE of the generalized (and optionally asymmetric) diagonal dynamics.

    Qbar and Nbar are targeted at their sample moments; intercept positive
    definiteness is checked at every evaluation and penalized, and a final
    infeasible intercept raises InterceptNotPSD.
    """
    if xi.n_obs < 250:
        raise SampleTooShort(f"need at least 250 observations, got {xi.n_obs}")
    if xi.k > 10:
        warnings.warn(
            f"diagonal correlation dynamics with k={xi.k} assets is unreliable",
            UserWarning,
            stacklevel=2,
        )
    values = xi.values
    t, k = values.shape
    neg = np.minimum(values, 0.0)
    qbar = unconditional_corr(values)
    nbar = neg.T @ neg / t

    def unpack(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = _sigmoid(theta[:k])  # a_i^2 + b_i^2
        w = _sigmoid(theta[k : 2 * k])  # share of s in a_i^2
        a = np.sqrt(s * w)
        b = np.sqrt(s * (1.0 - w))
        g = _sigmoid(theta[2 * k :]) if asymmetric else np.zeros(k)
        return a, b, g

    def objective(theta: np.ndarray) -> float:
        a, b, g = unpack(theta)
        intercept = _generalized_intercept(qbar, nbar, a, b, g)
        min_eig = float(np.linalg.eigvalsh(intercept)[0])
        if min_eig < 1e-12:
            return 1e4 + 1e4 * (1e-12 - min_eig)
        q_path = generalized_q_path(
            values, neg, intercept, np.outer(a, a), np.outer(b, b), np.outer(g, g), qbar
        )
        try:
            terms = _corr_loglik_terms(values, _normalize_q(q_path))
        except NonPositiveDefiniteR:
            return 1e10
        return -float(np.sum(terms)) / t

    starts = [_gdcc_theta(np.full(k, av), np.full(k, bv), gv, k, asymmetric)
              for av, bv, gv in ((0.02, 0.95, 0.05), (0.05, 0.90, 0.02), (0.01, 0.97, 0.01))]
    try:
        scalar = fit_dcc(xi)
        a0 = np.full(k, max(scalar.alpha_total, 1e-6))
        b0 = np.full(k, max(scalar.beta_total, 1e-6))
        starts.append(_gdcc_theta(a0, b0, 1e-4, k, asymmetric))
    except (NonConvergence, InvalidParams):
        pass
    if asymmetric:
        try:
            symmetric = fit_gdcc(xi, asymmetric=False)
            starts.append(
                _gdcc_theta(symmetric.A**2, symmetric.B**2, 1e-6, k, True)
            )
        except (NonConvergence, InterceptNotPSD):
            pass

    theta_hat, _, converged, status = minimize_restarts(objective, starts)
    if theta_hat is None:
        raise NonConvergence(f"generalized DCC estimation failed: {status}")
    a, b, g = unpack(theta_hat)
    intercept = _generalized_intercept(qbar, nbar, a, b, g)
    if float(np.linalg.eigvalsh(intercept)[0]) < 0.0:
        raise InterceptNotPSD("no feasible intercept found at the optimum")
    q_path = generalized_q_path(
        values, neg, intercept, np.outer(a, a), np.outer(b, b), np.outer(g, g), qbar
    )
    r_path = _normalize_q(q_path)
    loglik = float(np.sum(_corr_loglik_terms(values, r_path)))
    fit = AgdccFit(
        A=a,
        B=b,
        G=g,
        Qbar=qbar,
        Nbar=nbar,
        R_path=r_path,
        loglik=loglik,
        asymmetric=asymmetric,
        converged=converged,
        dates=xi.dates,
        assets=xi.assets,
    )
    if not converged:
        raise NonConvergence("generalized DCC optimizer did not converge", best=fit, status=status)
    return fit


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -40.0, 40.0)))


def _logit(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return np.log(p / (1.0 - p))


def _gdcc_theta(a2, b2, g, k: int, asymmetric: bool) -> np.ndarray:
    """Map (a_i^2, b_i^2, g_i) values to the unconstrained parameter vector."""
    a2 = np.broadcast_to(np.asarray(a2, dtype=float), (k,))
    b2 = np.broadcast_to(np.asarray(b2, dtype=float), (k,))
    s = np.clip(a2 + b2, 1e-10, 1.0 - 1e-8)
    w = np.clip(a2 / s, 1e-10, 1.0 - 1e-10)
    parts = [_logit(s), _logit(w)]
    if asymmetric:
        parts.append(_logit(np.broadcast_to(np.asarray(g, dtype=float), (k,))))
    return np.concatenate(parts)


def assemble_covariance(d_path: np.ndarray, r_path: np.ndarray) -> np.ndarray:
    """H_t from conditional standard deviations and correlations."""
    d = np.asarray(d_path, dtype=float)
    if d.ndim != 2 or d.shape[0] != r_path.shape[0] or d.shape[1] != r_path.shape[1]:
        raise ValueError("d_path must be T x k aligned with r_path")
    return r_path * (d[:, :, None] * d[:, None, :])


def summarize_dcc(
    fit: DccFit | AgdccFit,
    pair: tuple,
    windows: Sequence[CrisisWindow] = (),
) -> DccSummary:
    """Mean/min/max of the pair's correlation path over the sample and windows."""
    assets = fit.assets
    i = assets.index(pair[0]) if isinstance(pair[0], str) else int(pair[0])
    j = assets.index(pair[1]) if isinstance(pair[1], str) else int(pair[1])
    rho = fit.R_path[:, i, j]
    label_i = assets[i] if assets else str(i)
    label_j = assets[j] if assets else str(j)
    rows = [_window_stats("total", rho)]
    for window in windows:
        mask = window.mask(fit.dates)
        if not mask.any():
            raise EmptyWindow(window.label)
        rows.append(_window_stats(window.label, rho[mask]))
    return DccSummary(pair=(label_i, label_j), rows=tuple(rows))


def _window_stats(label: str, rho: np.ndarray) -> WindowStats:
    return WindowStats(label, float(rho.mean()), float(rho.min()), float(rho.max()))
