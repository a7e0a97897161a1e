"""Regime-wise density fitting: maximise the weight-averaged log-likelihood.

For one regime with point weights w >= 0 over the scaled panel, the objective

    g(lam) = -sum_{t,i} w_{t,i} (sum_j lam_j x_{t,i}^j + ln Z(lam))
           = -(lam . S + W ln Z),   S_j = sum w x^j,  W = sum w,

is concave in lam (ln Z is a log-partition).  ``fit_lambda`` maximises it
subject to |lam|_1 <= c_lambda with a projected ascent scheme: full Newton
steps whenever the candidate stays inside the l1 ball, projected-gradient
steps with backtracking otherwise.  Every accepted step improves the
objective, so the iterate trace is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegime
from .maxent import QuadratureRule, gauss_legendre, validate_lambda

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 5000


def feature_matrix(values: np.ndarray, m: int) -> np.ndarray:
    """Monomial features x_{t,i}^j for j = 1..m; shape (T, n, m)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if not 1 <= m <= 12:
        raise ValueError(f"moment order must be in 1..12, got {m}")
    if np.any(np.abs(values) > 1.0 + 1e-12):
        raise ValueError("feature matrix requires values scaled into [-1, 1]")
    return np.power.outer(np.clip(values, -1.0, 1.0), np.arange(1, m + 1))


def _weighted_sums(features: np.ndarray, w: np.ndarray):
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.shape != features.shape[:2]:
        raise ValueError(f"weight shape {w.shape} does not match features {features.shape[:2]}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    S = np.tensordot(w, features, axes=([0, 1], [0, 1]))
    return S, float(w.sum())


def _log_z_and_moments(lam: np.ndarray, quad: QuadratureRule, j_max: int):
    P = quad.node_powers(j_max)
    s = -P[:, : lam.size] @ lam
    smax = s.max()
    ew = quad.weights * np.exp(s - smax)
    z = ew.sum()
    return float(np.log(z)) + smax, (ew @ P) / z


def weighted_loglik(lam, features: np.ndarray, w, quad: QuadratureRule | None = None) -> float:
    """-(lam . S + W ln Z): the gamma-weighted log-likelihood of one regime."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    S, W = _weighted_sums(features, w)
    if lam.size != features.shape[2]:
        raise ValueError("coefficient length does not match feature order")
    log_z, _ = _log_z_and_moments(lam, quad, lam.size)
    return float(-(lam @ S + W * log_z))


def loglik_gradient(lam, features: np.ndarray, w, quad: QuadratureRule | None = None) -> np.ndarray:
    """Gradient of the objective: component j is W * (E_lam[X^j] - mu_hat_j)."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    S, W = _weighted_sums(features, w)
    if W <= 0:
        raise EmptyRegime("gradient undefined for zero total weight")
    _, mom = _log_z_and_moments(lam, quad, lam.size)
    return W * mom - S


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {x : |x|_1 <= radius} (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius == 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - (css - radius) / ks > 0)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


@dataclass
class LambdaFit:
    """Solution of one regime subproblem."""

    lam: np.ndarray
    log_z: float
    converged: bool
    n_iter: int
    trace: list[float]          # weighted log-likelihood after each accepted step
    objective: float


def fit_lambda(features: np.ndarray, w, c_lambda: float = np.inf,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               quad: QuadratureRule | None = None,
               warm_start=None) -> LambdaFit:
    """Maximise the weighted log-likelihood subject to |lam|_1 <= c_lambda.

    Raises EmptyRegime when the weights carry no mass.  If the iteration
    budget runs out the best iterate is returned with ``converged=False``
    rather than raising.
    """
    quad = quad or gauss_legendre()
    m = features.shape[2]
    S, W = _weighted_sums(features, w)
    if W <= 0:
        raise EmptyRegime("cannot fit a regime with zero total weight")
    if tol <= 0:
        raise ValueError("tol must be positive")
    mu_hat = S / W

    if c_lambda == 0:
        lam = np.zeros(m)
        log_z, _ = _log_z_and_moments(lam, quad, m)
        val = -(W * log_z)
        return LambdaFit(lam=lam, log_z=log_z, converged=True, n_iter=0,
                         trace=[val], objective=val)

    lam = np.zeros(m) if warm_start is None else validate_lambda(warm_start).copy()
    if np.abs(lam).sum() > c_lambda:
        lam = project_l1_ball(lam, c_lambda)

    bounded = np.isfinite(c_lambda)
    log_z, mom = _log_z_and_moments(lam, quad, 2 * m)
    h = -(lam @ mu_hat + log_z)                 # objective per unit weight
    trace = [W * h]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = mom[:m] - mu_hat                    # ascent gradient of h

        # stationarity: plain gradient when strictly interior, projected
        # gradient residual when the l1 constraint may be active
        interior = not bounded or np.abs(lam).sum() < c_lambda - tol
        if interior:
            if np.abs(g).max() <= tol:
                converged = True
                break
        else:
            resid = project_l1_ball(lam + g, c_lambda) - lam
            if np.abs(resid).max() <= tol:
                converged = True
                break

        accepted = False
        # Newton candidate: Hessian of ln Z is the monomial covariance matrix
        idx = np.arange(m)
        H = mom[idx[:, None] + idx[None, :] + 1] - np.outer(mom[:m], mom[:m])
        try:
            d = np.linalg.solve(H + 1e-13 * np.eye(m), g)
        except np.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)) and g @ d > 0:
            cand = lam + d
            if not bounded or np.abs(cand).sum() <= c_lambda:
                lz_n, mom_n = _log_z_and_moments(cand, quad, 2 * m)
                h_n = -(cand @ mu_hat + lz_n)
                if h_n >= h + 1e-4 * (g @ d):
                    lam, log_z, mom, h = cand, lz_n, mom_n, h_n
                    trace.append(W * h)
                    accepted = True

        if not accepted:
            t = step
            for _ in range(60):
                cand = lam + t * g
                if bounded:
                    cand = project_l1_ball(cand, c_lambda)
                delta = cand - lam
                lz_n, mom_n = _log_z_and_moments(cand, quad, 2 * m)
                h_n = -(cand @ mu_hat + lz_n)
                if h_n >= h + 1e-4 * (g @ delta) and h_n >= h:
                    lam, log_z, mom, h = cand, lz_n, mom_n, h_n
                    trace.append(W * h)
                    accepted = True
                    step = min(t * 2.0, 1e6)
                    break
                t *= 0.5
            if not accepted:
                # no improving step at float resolution: treat as stationary
                converged = True
                break

    return LambdaFit(lam=lam, log_z=log_z, converged=converged, n_iter=it,
                     trace=trace, objective=W * h)


def sparsify(lam, eps_sparse: float = 1e-5):
    """Zero out coefficients below eps_sparse; returns (vector, active count)."""
    lam = validate_lambda(lam)
    if eps_sparse < 0:
        raise ValueError("eps_sparse must be nonnegative")
    out = np.where(np.abs(lam) < eps_sparse, 0.0, lam)
    return out, int(np.count_nonzero(out))
