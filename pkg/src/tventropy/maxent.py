"""Exponential-family maximum-entropy densities on [-1, 1].

A density is parameterised by a coefficient vector ``lam`` of length m,

    f(x) = exp(-(lam_1 x + lam_2 x^2 + ... + lam_m x^m)) / Z,
    Z    = integral_{-1}^{1} exp(-sum_j lam_j x^j) dx,

so the normalisation constant is never stored: log Z plays the role of the
zeroth coefficient.  All integrals run over fixed Gauss-Legendre nodes; every
exponential is evaluated with a max-shift so the routines stay finite for
any coefficient magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

MAX_ORDER = 12          # highest supported monomial degree
DEFAULT_QUAD_ORDER = 200

_POWER_CACHE: dict[int, np.ndarray] = {}


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def node_powers(self, j_max: int) -> np.ndarray:
        """Matrix of node powers x_q^j for j = 1..j_max, shape (order, j_max).

        Tables up to degree 2 * MAX_ORDER are built once per rule and sliced,
        since the solvers request them in tight loops.
        """
        if j_max <= 2 * MAX_ORDER:
            table = _POWER_CACHE.get(self.order)
            if table is None:
                table = np.empty((self.nodes.size, 2 * MAX_ORDER))
                table[:, 0] = self.nodes
                for j in range(1, 2 * MAX_ORDER):
                    table[:, j] = table[:, j - 1] * self.nodes
                table.setflags(write=False)
                _POWER_CACHE[self.order] = table
            return table[:, :j_max]
        return np.power.outer(self.nodes, np.arange(1, j_max + 1))


@lru_cache(maxsize=32)
def gauss_legendre(order: int = DEFAULT_QUAD_ORDER) -> QuadratureRule:
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=order)


def validate_lambda(lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.ndim != 1 or not 1 <= lam.size <= MAX_ORDER:
        raise ValueError(
            f"coefficient vector must be 1-D with 1..{MAX_ORDER} entries, got shape {lam.shape}"
        )
    if not np.isfinite(lam).all():
        raise ValueError("coefficient vector contains non-finite entries")
    return lam


def _log_weighted(lam: np.ndarray, quad: QuadratureRule):
    """Log-domain integrand pieces: s_q = -sum_j lam_j x_q^j and its max."""
    s = -quad.node_powers(lam.size) @ lam
    return s, s.max()


def log_partition(lam, quad: QuadratureRule | None = None) -> float:
    """ln Z = ln integral exp(-sum_j lam_j x^j) dx over [-1, 1]."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    s, smax = _log_weighted(lam, quad)
    return float(np.log(np.dot(quad.weights, np.exp(s - smax)))) + smax


def density(lam, x, quad: QuadratureRule | None = None):
    """Density values at x (scalar or array); x must lie in [-1, 1]."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0) or np.any(x > 1.0):
        raise DomainError("density evaluated outside [-1, 1]")
    log_z = log_partition(lam, quad)
    s = -np.power.outer(np.atleast_1d(x), np.arange(1, lam.size + 1)) @ lam
    out = np.exp(s - log_z)
    return float(out[0]) if x.ndim == 0 else out


def log_density(lam, x, quad: QuadratureRule | None = None):
    """ln f(x); same domain contract as :func:`density`."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0) or np.any(x > 1.0):
        raise DomainError("log-density evaluated outside [-1, 1]")
    log_z = log_partition(lam, quad)
    s = -np.power.outer(np.atleast_1d(x), np.arange(1, lam.size + 1)) @ lam
    out = s - log_z
    return float(out[0]) if x.ndim == 0 else out


def moments(lam, quad: QuadratureRule | None = None, j_max: int | None = None) -> np.ndarray:
    """E[X^j] for j = 1..j_max under the density defined by ``lam``."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    j_max = j_max if j_max is not None else lam.size
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    s, smax = _log_weighted(lam, quad)
    ew = quad.weights * np.exp(s - smax)
    return (ew @ quad.node_powers(j_max)) / ew.sum()


def cdf(lam, x, quad: QuadratureRule | None = None) -> float:
    """P(X <= x), computed by mapping the quadrature rule onto [-1, x].

    Reuses the same rule order on the subinterval, so cdf(1) reproduces the
    full-interval normalisation exactly.
    """
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    x = float(x)
    if x < -1.0 or x > 1.0:
        raise DomainError("cdf argument outside [-1, 1]")
    if x == -1.0:
        return 0.0
    log_z = log_partition(lam, quad)
    half = 0.5 * (x + 1.0)
    u = half * (quad.nodes + 1.0) - 1.0          # [-1, 1] -> [-1, x]
    s = -np.power.outer(u, np.arange(1, lam.size + 1)) @ lam
    val = half * np.dot(quad.weights, np.exp(s - log_z))
    return float(min(max(val, 0.0), 1.0))


def quantile(lam, alpha: float, quad: QuadratureRule | None = None,
             max_iter: int = 200) -> float:
    """Inverse CDF by bisection; alpha must lie strictly inside (0, 1)."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {alpha}")
    lo, hi = -1.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if cdf(lam, mid, quad) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            return 0.5 * (lo + hi)
    raise ConvergenceError(
        f"quantile bisection failed to bracket level {alpha} in {max_iter} iterations"
    )


def _cdf_grid(lam: np.ndarray, quad: QuadratureRule, grid_size: int = 4097):
    """CDF sampled on a uniform grid, for bulk inverse-CDF sampling."""
    xs = np.linspace(-1.0, 1.0, grid_size)
    log_z = log_partition(lam, quad)
    half = 0.5 * (xs + 1.0)                                   # (G,)
    u = half[:, None] * (quad.nodes + 1.0)[None, :] - 1.0      # (G, q)
    s = -np.tensordot(
        np.power.outer(u.ravel(), np.arange(1, lam.size + 1)).reshape(u.shape + (lam.size,)),
        lam, axes=([2], [0]))
    vals = half * (np.exp(s - log_z) @ quad.weights)
    vals[0], vals[-1] = 0.0, 1.0
    return xs, np.maximum.accumulate(np.clip(vals, 0.0, 1.0))


def sample(lam, count: int, seed: int, quad: QuadratureRule | None = None) -> np.ndarray:
    """i.i.d. draws by inverse-CDF applied to seeded uniform variates."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    xs, cg = _cdf_grid(lam, quad)
    idx = np.clip(np.searchsorted(cg, u, side="right"), 1, len(xs) - 1)
    c0, c1 = cg[idx - 1], cg[idx]
    x0, x1 = xs[idx - 1], xs[idx]
    frac = np.where(c1 > c0, (u - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.0)
    return x0 + frac * (x1 - x0)


def entropy(lam, quad: QuadratureRule | None = None) -> float:
    """Differential entropy H = sum_j lam_j E[X^j] + ln Z."""
    lam = validate_lambda(lam)
    quad = quad or gauss_legendre()
    return float(lam @ moments(lam, quad, lam.size)) + log_partition(lam, quad)
