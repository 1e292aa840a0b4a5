"""Shared reparameterizations and quasi-Newton fitting utilities.

All constrained estimations in this package run over unconstrained transforms:
a log map for scale parameters and a weighted "budget" map sending R^m onto
{c >= 0 : sum(w*c) < 1} so persistence constraints hold by construction.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

_CLIP = 40.0


def budget_forward(theta: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Map unconstrained theta to nonnegative components with sum(w*c) < 1."""
    v = np.exp(np.clip(theta, -_CLIP, _CLIP))
    return v / (1.0 + float(weights @ v))


def budget_inverse(components: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Inverse of budget_forward; components are floored away from zero."""
    c = np.maximum(np.asarray(components, dtype=float), 1e-12)
    budget = float(weights @ c)
    if budget >= 1.0:
        raise ValueError(f"weighted sum {budget} must be below 1")
    v = c / (1.0 - budget)
    return np.log(v)


def minimize_restarts(objective, starts, gtol: float = 1e-6):
    """L-BFGS-B from several deterministic starts; keep the best optimum.

    Returns (theta, fun, converged, status) where converged reflects the
    optimizer status at the returned point.
    """
    best = None
    for theta0 in starts:
        res = minimize(
            objective,
            np.asarray(theta0, dtype=float),
            method="L-BFGS-B",
            options={"gtol": gtol, "maxiter": 500, "maxfun": 5000},
        )
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun - 1e-12:
            best = res
    if best is None:
        return None, np.inf, False, "all starts produced non-finite objectives"
    grad_norm = float(np.max(np.abs(best.jac))) if best.jac is not None else np.inf
    converged = bool(best.success) or grad_norm < 1e-4
    return best.x, float(best.fun), converged, str(best.message)


def opg_standard_errors(per_obs_loglik, params: np.ndarray, step: float = 1e-5):
    """Outer-product-of-gradients standard errors in the natural parameter space.

    per_obs_loglik(params) must return the T-vector of log-likelihood
    contributions. Returns None when the OPG matrix is singular or any
    perturbed evaluation fails.
    """
    params = np.asarray(params, dtype=float)
    m = params.size
    try:
        base = np.asarray(per_obs_loglik(params))
    except Exception:
        return None
    scores = np.empty((base.size, m))
    for i in range(m):
        h = step * max(1.0, abs(params[i]))
        up = params.copy()
        dn = params.copy()
        up[i] += h
        dn[i] -= h
        try:
            lu = np.asarray(per_obs_loglik(up))
            ld = np.asarray(per_obs_loglik(dn))
        except Exception:
            return None
        scores[:, i] = (lu - ld) / (2.0 * h)
    if not np.all(np.isfinite(scores)):
        return None
    opg = scores.T @ scores
    try:
        cov = np.linalg.inv(opg)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(cov)
    if np.any(diag < 0) or not np.all(np.isfinite(diag)):
        return None
    return np.sqrt(diag)
