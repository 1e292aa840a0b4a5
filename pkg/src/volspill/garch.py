"""Univariate conditional-variance models: GARCH(P,Q) and GJR-GARCH(P,O,Q).

The filter supports the full power family (delta 1 or 2); estimation is
Gaussian quasi-maximum likelihood on the squared-shock (delta=2) family. All
constrained parameters are optimized over unconstrained transforms so the
sign constraints and persistence < 1 hold by construction, with deterministic
variance-targeting restarts reaching the near-integrated region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import garch_power_path
from ._numopt import budget_forward, budget_inverse, minimize_restarts, opg_standard_errors
from .errors import InvalidParams, NonConvergence, SampleTooShort, ZeroVariance

__all__ = [
    "GarchSpec",
    "GarchParams",
    "UnivariateFit",
    "garch_filter",
    "fit_garch",
    "standardized_residuals",
]


@dataclass(frozen=True)
class GarchSpec:
    """Model orders: p ARCH terms, o asymmetry terms, q GARCH terms."""

    p: int = 1
    o: int = 0
    q: int = 1
    delta: int = 2

    def __post_init__(self) -> None:
        if self.p < 1 or self.o < 0 or self.q < 0:
            raise ValueError("need p >= 1, o >= 0, q >= 0")
        if self.delta not in (1, 2):
            raise ValueError("delta must be 1 or 2")

    @property
    def n_params(self) -> int:
        return 1 + self.p + self.o + self.q


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def persistence(self) -> float:
        return sum(self.alpha) + 0.5 * sum(self.gamma) + sum(self.beta)


def _validate_params(params: GarchParams, spec: GarchSpec) -> None:
    if len(params.alpha) != spec.p or len(params.gamma) != spec.o or len(params.beta) != spec.q:
        raise InvalidParams(
            f"parameter lengths {len(params.alpha)}/{len(params.gamma)}/{len(params.beta)} "
            f"do not match spec ({spec.p},{spec.o},{spec.q})"
        )
    if params.omega <= 0.0:
        raise InvalidParams("omega must be strictly positive")
    if any(a < 0.0 for a in params.alpha):
        raise InvalidParams("alpha coefficients must be non-negative")
    if any(b < 0.0 for b in params.beta):
        raise InvalidParams("beta coefficients must be non-negative")
    for o, g in enumerate(params.gamma):
        paired_alpha = params.alpha[o] if o < spec.p else 0.0
        if paired_alpha + g < 0.0:
            raise InvalidParams(f"alpha_{o + 1} + gamma_{o + 1} must be non-negative")


def garch_filter(
    eps,
    params: GarchParams,
    spec: GarchSpec = GarchSpec(),
    initial: Optional[float] = None,
) -> np.ndarray:
    """Conditional-variance path for the power-family recursion.

    The recursion runs on sigma^delta and starts at the sample variance of
    eps raised to delta/2 (or `initial`, interpreted as a variance). The
    asymmetry indicator is 1 when the lagged shock is strictly negative.
    Returns the variance path sigma^2 of the same length as eps.
    """
    _validate_params(params, spec)
    arr = np.asarray(eps, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidParams("eps must be finite")
    v0 = float(np.var(arr)) if initial is None else float(initial)
    if v0 <= 0.0:
        raise ZeroVariance("initial variance must be positive")
    delta = spec.delta
    s0 = v0 ** (delta / 2.0)
    power = np.abs(arr) ** delta
    neg = (arr < 0.0).astype(float)
    s_path = garch_power_path(
        power,
        neg,
        float(params.omega),
        np.asarray(params.alpha, dtype=float),
        np.asarray(params.gamma, dtype=float),
        np.asarray(params.beta, dtype=float),
        s0,
    )
    return s_path if delta == 2 else s_path ** 2


@dataclass(frozen=True)
class UnivariateFit:
    """QMLE result: parameters, variance path and standardized residuals."""

    spec: GarchSpec
    params: GarchParams
    sigma2_path: np.ndarray
    std_residuals: np.ndarray
    loglik: float
    persistence: float
    stationary: bool
    converged: bool
    n_obs: int
    std_errors: Optional[np.ndarray] = None
    name: str = "series"

    @property
    def omega(self) -> float:
        return self.params.omega

    @property
    def alpha(self) -> tuple[float, ...]:
        return self.params.alpha

    @property
    def gamma(self) -> tuple[float, ...]:
        return self.params.gamma

    @property
    def beta(self) -> tuple[float, ...]:
        return self.params.beta


def _component_weights(spec: GarchSpec) -> np.ndarray:
    w_alpha = [0.5 if p < spec.o else 1.0 for p in range(spec.p)]
    w_sum = [0.5] * spec.o
    w_beta = [1.0] * spec.q
    return np.asarray(w_alpha + w_sum + w_beta)


def _theta_to_params(theta: np.ndarray, spec: GarchSpec) -> GarchParams:
    omega = math.exp(float(np.clip(theta[0], -40.0, 40.0)))
    comps = budget_forward(theta[1:], _component_weights(spec))
    alpha = comps[: spec.p]
    summed = comps[spec.p : spec.p + spec.o]
    beta = comps[spec.p + spec.o :]
    gamma = np.array(
        [summed[o] - (alpha[o] if o < spec.p else 0.0) for o in range(spec.o)]
    )
    return GarchParams(omega, tuple(alpha), tuple(gamma), tuple(beta))


def _params_to_theta(params: GarchParams, spec: GarchSpec) -> np.ndarray:
    comps = list(params.alpha)
    comps += [
        (params.alpha[o] if o < spec.p else 0.0) + params.gamma[o] for o in range(spec.o)
    ]
    comps += list(params.beta)
    theta_rest = budget_inverse(np.asarray(comps), _component_weights(spec))
    return np.concatenate(([math.log(params.omega)], theta_rest))


def _target_start(sample_var: float, spec: GarchSpec, persistence: float) -> GarchParams:
    """Variance-targeting start at the requested persistence level."""
    arch_share = min(0.05, persistence / 2.0)
    alpha = [arch_share] + [1e-4] * (spec.p - 1)
    if spec.o:
        gamma = [min(0.04, arch_share)] + [1e-4] * (spec.o - 1)
    else:
        gamma = []
    used = sum(alpha) + 0.5 * sum(gamma)
    if spec.q:
        beta = [max(persistence - used, 0.05)] + [1e-4] * (spec.q - 1)
    else:
        beta = []
    params = GarchParams(1.0, tuple(alpha), tuple(gamma), tuple(beta))
    lam = params.persistence
    omega = sample_var * max(1.0 - lam, 1e-4)
    return GarchParams(omega, params.alpha, params.gamma, params.beta)


def _gaussian_loglik(eps: np.ndarray, sigma2: np.ndarray) -> float:
    return -0.5 * float(
        np.sum(np.log(2.0 * math.pi * sigma2) + eps**2 / sigma2)
    )


def fit_garch(eps, spec: GarchSpec = GarchSpec(), name: str = "series") -> UnivariateFit:
    """Quasi-maximum-likelihood fit of the delta=2 family.

    Restarts from three deterministic variance-targeting seeds (persistence
    0.90/0.95/0.98); asymmetric specs add a start at the nested symmetric
    optimum so the GJR likelihood can never fall below the GARCH one.
    """
    arr = np.asarray(eps, dtype=float).ravel()
    t = arr.size
    if t < 250:
        raise SampleTooShort(f"need at least 250 observations, got {t}")
    sample_var = float(np.var(arr))
    if sample_var <= 0.0:
        raise ZeroVariance("residual series has zero variance")
    if spec.delta != 2:
        raise InvalidParams("estimation supports the squared-shock family only (delta=2)")

    power = arr**2
    neg = (arr < 0.0).astype(float)

    def sigma2_of(theta: np.ndarray) -> tuple[GarchParams, np.ndarray]:
        params = _theta_to_params(theta, spec)
        path = garch_power_path(
            power,
            neg,
            params.omega,
            np.asarray(params.alpha),
            np.asarray(params.gamma),
            np.asarray(params.beta),
            sample_var,
        )
        return params, path

    def objective(theta: np.ndarray) -> float:
        _, path = sigma2_of(theta)
        if np.any(path <= 0.0) or not np.all(np.isfinite(path)):
            return 1e10
        return -_gaussian_loglik(arr, path) / t

    starts = [
        _params_to_theta(_target_start(sample_var, spec, lam), spec)
        for lam in (0.90, 0.95, 0.98)
    ]
    if spec.o > 0:
        try:
            nested = fit_garch(arr, GarchSpec(spec.p, 0, spec.q), name=name)
        except NonConvergence as exc:
            nested = exc.best
        if nested is not None:
            seeded = GarchParams(
                nested.params.omega,
                nested.params.alpha,
                tuple([1e-6] * spec.o),
                nested.params.beta,
            )
            if seeded.persistence < 1.0:
                starts.append(_params_to_theta(seeded, spec))

    theta_hat, _, converged, status = minimize_restarts(objective, starts)
    if theta_hat is None:
        raise NonConvergence(f"GARCH estimation failed: {status}")
    params, sigma2 = sigma2_of(theta_hat)
    loglik = _gaussian_loglik(arr, sigma2)

    def per_obs(raw: np.ndarray) -> np.ndarray:
        trial = GarchParams(
            float(raw[0]),
            tuple(raw[1 : 1 + spec.p]),
            tuple(raw[1 + spec.p : 1 + spec.p + spec.o]),
            tuple(raw[1 + spec.p + spec.o :]),
        )
        path = garch_power_path(
            power,
            neg,
            trial.omega,
            np.asarray(trial.alpha),
            np.asarray(trial.gamma),
            np.asarray(trial.beta),
            sample_var,
        )
        if np.any(path <= 0.0):
            return np.full(t, np.nan)
        return -0.5 * (np.log(2.0 * math.pi * path) + arr**2 / path)

    natural = np.concatenate(
        [[params.omega], params.alpha, params.gamma, params.beta]
    )
    se = opg_standard_errors(per_obs, natural)

    fit = UnivariateFit(
        spec=spec,
        params=params,
        sigma2_path=sigma2,
        std_residuals=arr / np.sqrt(sigma2),
        loglik=loglik,
        persistence=params.persistence,
        stationary=params.persistence < 1.0,
        converged=converged,
        n_obs=t,
        std_errors=se,
        name=name,
    )
    if not converged:
        raise NonConvergence("GARCH optimizer did not converge", best=fit, status=status)
    return fit


def standardized_residuals(fit: UnivariateFit) -> np.ndarray:
    """xi_t = eps_t / sigma_t for the fitted variance path."""
    return fit.std_residuals
