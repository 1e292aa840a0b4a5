"""Compiled inner loops for the variance and correlation recursions.

These are the only time-ordered loops in the package; everything around them
is vectorized numpy. Pre-sample conventions: missing |eps|^delta terms use the
initialization level, missing asymmetric terms half of it, missing lagged
sigma terms the initialization level.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def garch_power_path(abs_eps_pow, neg_mask, omega, alpha, gamma, beta, s0):
    """Recursion for s_t = sigma_t^delta given |eps_t|^delta and sign indicators.

    s0 seeds the path (s_1 = s0) and stands in for every pre-sample term.
    """
    T = abs_eps_pow.shape[0]
    P = alpha.shape[0]
    O = gamma.shape[0]
    Q = beta.shape[0]
    s = np.empty(T)
    s[0] = s0
    for t in range(1, T):
        acc = omega
        for p in range(P):
            j = t - 1 - p
            acc += alpha[p] * (abs_eps_pow[j] if j >= 0 else s0)
        for o in range(O):
            j = t - 1 - o
            if j >= 0:
                acc += gamma[o] * abs_eps_pow[j] * neg_mask[j]
            else:
                acc += gamma[o] * 0.5 * s0
        for q in range(Q):
            j = t - 1 - q
            acc += beta[q] * (s[j] if j >= 0 else s0)
        s[t] = acc
    return s


@njit(cache=True, nogil=True)
def arma_css_residuals(x, const, ar, ma):
    """Conditional-sum-of-squares residuals with zero pre-sample values."""
    T = x.shape[0]
    p = ar.shape[0]
    q = ma.shape[0]
    e = np.zeros(T)
    for t in range(T):
        acc = x[t] - const
        for i in range(p):
            j = t - 1 - i
            if j >= 0:
                acc -= ar[i] * x[j]
        for i in range(q):
            j = t - 1 - i
            if j >= 0:
                acc -= ma[i] * e[j]
        e[t] = acc
    return e


@njit(cache=True, nogil=True)
def dcc_q_path(xi, qbar, alpha, beta):
    """Scalar correlation recursion; missing lags backcast to qbar.

    Q_1 equals qbar exactly because every pre-sample term is qbar and the
    intercept weights sum to one.
    """
    T, k = xi.shape
    P = alpha.shape[0]
    Q = beta.shape[0]
    w = 1.0 - np.sum(alpha) - np.sum(beta)
    q = np.empty((T, k, k))
    for t in range(T):
        for i in range(k):
            for j in range(k):
                acc = w * qbar[i, j]
                for p in range(P):
                    s = t - 1 - p
                    if s >= 0:
                        acc += alpha[p] * xi[s, i] * xi[s, j]
                    else:
                        acc += alpha[p] * qbar[i, j]
                for r in range(Q):
                    s = t - 1 - r
                    if s >= 0:
                        acc += beta[r] * q[s, i, j]
                    else:
                        acc += beta[r] * qbar[i, j]
                q[t, i, j] = acc
    return q


@njit(cache=True, nogil=True)
def generalized_q_path(xi, neg, intercept, a2, b2, g2, q1):
    """Order-one recursion with elementwise loading matrices.

    a2, b2, g2 hold the outer products of the diagonal loadings, so the update
    is q_ij = c_ij + a_i a_j xi_i xi_j + b_i b_j q_ij + g_i g_j n_i n_j.
    """
    T, k = xi.shape
    q = np.empty((T, k, k))
    for i in range(k):
        for j in range(k):
            q[0, i, j] = q1[i, j]
    for t in range(1, T):
        for i in range(k):
            for j in range(k):
                q[t, i, j] = (
                    intercept[i, j]
                    + a2[i, j] * xi[t - 1, i] * xi[t - 1, j]
                    + b2[i, j] * q[t - 1, i, j]
                    + g2[i, j] * neg[t - 1, i] * neg[t - 1, j]
                )
    return q


@njit(cache=True, nogil=True)
def simulate_garch_dcc(z, omega, alpha, gamma, beta, qbar, corr_a2, corr_b2, corr_g2, corr_intercept):
    """Joint simulator: per-asset GJR recursions coupled through a Q_t process.

    z is an iid standardized shock matrix (T, k); correlation loadings are in
    the same elementwise outer-product form as generalized_q_path (pass zero
    matrices for a constant-correlation process).
    """
    T, k = z.shape
    eps = np.empty((T, k))
    xi = np.empty((T, k))
    sigma2 = np.empty((T, k))
    rpath = np.empty((T, k, k))
    q = qbar.copy()
    qnew = np.empty((k, k))
    lmat = np.empty((k, k))
    # unconditional variance seeds the variance recursions
    s_init = np.empty(k)
    for i in range(k):
        pers = alpha[i] + 0.5 * gamma[i] + beta[i]
        s_init[i] = omega[i] / (1.0 - pers)
    for t in range(T):
        if t == 0:
            for i in range(k):
                sigma2[t, i] = s_init[i]
        else:
            for i in range(k):
                e = eps[t - 1, i]
                ind = 1.0 if e < 0.0 else 0.0
                sigma2[t, i] = (
                    omega[i]
                    + alpha[i] * e * e
                    + gamma[i] * e * e * ind
                    + beta[i] * sigma2[t - 1, i]
                )
            for i in range(k):
                for j in range(k):
                    ni = min(xi[t - 1, i], 0.0)
                    nj = min(xi[t - 1, j], 0.0)
                    qnew[i, j] = (
                        corr_intercept[i, j]
                        + corr_a2[i, j] * xi[t - 1, i] * xi[t - 1, j]
                        + corr_b2[i, j] * q[i, j]
                        + corr_g2[i, j] * ni * nj
                    )
            for i in range(k):
                for j in range(k):
                    q[i, j] = qnew[i, j]
        for i in range(k):
            for j in range(k):
                rpath[t, i, j] = q[i, j] / np.sqrt(q[i, i] * q[j, j])
            rpath[t, i, i] = 1.0
        lmat[:, :] = np.linalg.cholesky(rpath[t])
        for i in range(k):
            acc = 0.0
            for j in range(i + 1):
                acc += lmat[i, j] * z[t, j]
            xi[t, i] = acc
            eps[t, i] = np.sqrt(sigma2[t, i]) * acc
    return eps, xi, sigma2, rpath
