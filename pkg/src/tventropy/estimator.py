"""Alternating estimation of regime densities and affiliations.

``fit`` runs the subspace iteration: with the affiliation field fixed, each
regime's coefficient vector solves an independent concave problem
(:mod:`.lambda_step`); with the coefficients fixed, the affiliations solve a
linear program (:mod:`.gamma_step`).  Both half-steps can only improve the
joint objective

    L = sum_k sum_{t,i} gamma[k,t,i] * ln f_k(x_{t,i}),

so the iteration trace is monotone and converges to a local maximum.

``anneal`` restarts the iteration from random block-constant affiliations and
keeps the best local optimum.  ``grid_search`` wraps the two-stage model
selection: regimes and switch budget first (no l1 bound), then the l1 bounds,
both chosen by BIC.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .gamma_step import build_scores, solve_gamma
from .lambda_step import feature_matrix, fit_lambda, project_l1_ball, sparsify
from .maxent import gauss_legendre, log_partition
from .panel import Panel


@dataclass(frozen=True)
class ModelConfig:
    """Estimation settings for one model cell."""

    k: int = 2                      # number of regimes
    c_gamma: float = 3.0            # switch budget per regime
    c_lambda: tuple | float = math.inf   # l1 bound(s); scalar broadcasts over regimes
    m: int = 6                      # moment order
    n_anneal: int = 10
    quad_order: int = 200
    tol_outer: float = 1e-6
    max_outer_iter: int = 200
    seed: int = 0
    eps_sparse: float = 1e-5
    tol_lambda: float = 1e-7
    max_lambda_iter: int = 5000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one regime")
        if self.c_gamma < 0:
            raise ValueError("c_gamma must be nonnegative")
        if not 1 <= self.m <= 12:
            raise ValueError("moment order must be in 1..12")
        if self.n_anneal < 1:
            raise ValueError("n_anneal must be >= 1")

    def c_lambda_per_regime(self) -> np.ndarray:
        c = np.asarray(self.c_lambda, dtype=float)
        if c.ndim == 0:
            c = np.full(self.k, float(c))
        if c.size != self.k or np.any(c < 0):
            raise ValueError("c_lambda must be a nonnegative scalar or one value per regime")
        return c


@dataclass
class FitResult:
    """One converged (or budget-exhausted) estimation run."""

    gamma: np.ndarray               # (K, T, n)
    lambdas: np.ndarray             # (K, m)
    log_z: np.ndarray               # (K,)
    objective: float
    bic: float
    param_count: int
    trace: list[float]
    converged: bool
    degenerate: bool
    config: ModelConfig
    n_outer: int

    @property
    def k(self) -> int:
        return self.gamma.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """(T, n) of the fitted panel."""
        return self.gamma.shape[1], self.gamma.shape[2]

    def hard_path(self) -> np.ndarray:
        """Argmax regime per (t, i)."""
        return self.gamma.argmax(axis=0)


def compose_lambda(weights, lambdas) -> np.ndarray:
    """Convex combination sum_k weights[k] * lambdas[k]."""
    weights = np.asarray(weights, dtype=float)
    lambdas = np.atleast_2d(np.asarray(lambdas, dtype=float))
    if weights.shape != (lambdas.shape[0],):
        raise ValueError("one weight per regime is required")
    if np.any(weights < -1e-12) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("weights must lie on the probability simplex")
    return weights @ lambdas


def _as_values(panel) -> np.ndarray:
    values = panel.values if isinstance(panel, Panel) else np.asarray(panel, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


def random_block_gamma(k: int, T: int, n: int, c_gamma: float, seed) -> np.ndarray:
    """Random binary affiliation repaired to satisfy the switch budget.

    Draws a uniform regime label per (t, i), then majority-smooths each
    dimension over contiguous time blocks.  The block count caps the per-dim
    switches at floor(c_gamma / n), so every regime's total variation stays
    within the budget.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=(T, n))
    n_blocks = int(c_gamma // max(n, 1)) + 1
    gamma = np.zeros((k, T, n))
    for i in range(n):
        for blk in np.array_split(np.arange(T), min(n_blocks, T)):
            counts = np.bincount(labels[blk, i], minlength=k)
            gamma[counts.argmax(), blk, i] = 1.0
    return gamma


def fit(panel, config: ModelConfig, gamma0: np.ndarray | None = None,
        lambda0: np.ndarray | None = None) -> FitResult:
    """Alternate the regime and affiliation subproblems until the objective
    stalls.  ``panel`` must already be scaled into [-1, 1].

    Regimes whose weight mass drops below a small floor (m + 2 points) are
    frozen for the iteration, mirroring the empty-regime rule; this keeps the
    likelihood bounded when the affiliation hands a regime only a sliver of
    the data.
    """
    values = _as_values(panel)
    if np.any(np.abs(values) > 1.0 + 1e-9):
        raise ValueError("fit expects values scaled into [-1, 1]; run rescale first")
    T, n = values.shape
    K, m = config.k, config.m
    quad = gauss_legendre(config.quad_order)
    F = feature_matrix(values, m)
    c_lam = config.c_lambda_per_regime()
    mass_floor = m + 2.0

    if gamma0 is None:
        gamma = random_block_gamma(K, T, n, config.c_gamma, config.seed)
    else:
        gamma = np.asarray(gamma0, dtype=float).copy()
        if gamma.shape != (K, T, n):
            raise ValueError(f"gamma0 must have shape {(K, T, n)}, got {gamma.shape}")

    if lambda0 is None:
        lambdas = np.zeros((K, m))
    else:
        lambdas = np.array(lambda0, dtype=float, copy=True).reshape(K, m)
        for k in range(K):
            if np.abs(lambdas[k]).sum() > c_lam[k]:
                lambdas[k] = project_l1_ball(lambdas[k], c_lam[k])
    log_zs = np.array([log_partition(lambdas[k], quad) for k in range(K)])

    scores = build_scores(lambdas, F, log_zs)
    trace: list[float] = []
    L_prev = -np.inf
    converged = False
    n_outer = 0
    for it in range(config.max_outer_iter):
        n_outer = it + 1
        lam_moved = 0.0
        for k in range(K):
            w = gamma[k]
            if w.sum() < mass_floor:
                continue                      # frozen for this iteration
            res = fit_lambda(F, w, c_lambda=c_lam[k], tol=config.tol_lambda,
                             max_iter=config.max_lambda_iter, quad=quad,
                             warm_start=lambdas[k])
            new_scores_k = -(F @ res.lam + res.log_z)
            # guard against float-order regressions of the shared objective
            if float((w * new_scores_k).sum()) >= float((w * scores[k]).sum()):
                lam_moved = max(lam_moved, float(np.abs(res.lam - lambdas[k]).max()))
                lambdas[k] = res.lam
                log_zs[k] = res.log_z
                scores[k] = new_scores_k

        gamma_new = solve_gamma(scores, config.c_gamma, gamma_prev=gamma)
        moved = float(np.abs(gamma_new - gamma).max())
        gamma = gamma_new
        L = float((gamma * scores).sum())
        trace.append(L)
        if (moved < 1e-12 and lam_moved < 1e-12) or (
                it >= 1 and abs(L - L_prev) < config.tol_outer * (1.0 + abs(L))):
            converged = True
            break
        L_prev = L

    L = trace[-1]
    hard = gamma.argmax(axis=0)
    degenerate = K > 1 and np.unique(hard).size == 1
    p = _param_count(gamma, lambdas, config.eps_sparse)
    result = FitResult(
        gamma=gamma, lambdas=lambdas, log_z=log_zs, objective=L,
        bic=-2.0 * L + p * math.log(n * T), param_count=p, trace=trace,
        converged=converged, degenerate=degenerate, config=config,
        n_outer=n_outer)
    return result


def _param_count(gamma: np.ndarray, lambdas: np.ndarray, eps_sparse: float) -> int:
    K = gamma.shape[0]
    active = sum(sparsify(lambdas[k], eps_sparse)[1] for k in range(K))
    hard = gamma.argmax(axis=0)
    n_seg = sum(1 + int((np.diff(hard[:, i]) != 0).sum()) for i in range(hard.shape[1]))
    return active + (K - 1) * n_seg


def param_count(fit_result: FitResult, eps_sparse: float | None = None) -> int:
    """Effective parameter number: active coefficients plus segment cost.

    p = sum_k ||lam_k||_0 + (K - 1) * S, with S the total count of maximal
    constant-in-time segments of the argmax regime path over all dimensions.
    """
    eps = fit_result.config.eps_sparse if eps_sparse is None else eps_sparse
    return _param_count(fit_result.gamma, fit_result.lambdas, eps)


def bic(fit_result: FitResult, n: int | None = None, T: int | None = None,
        eps_sparse: float | None = None) -> float:
    """Bayesian information criterion: -2 L + p ln(n T)."""
    T_f, n_f = fit_result.shape
    n = n_f if n is None else n
    T = T_f if T is None else T
    p = param_count(fit_result, eps_sparse)
    return -2.0 * fit_result.objective + p * math.log(n * T)


def schwarz_weights(bics) -> np.ndarray:
    """Posterior model probabilities exp(-delta/2), delta = BIC - min BIC."""
    b = np.asarray(bics, dtype=float)
    if b.size < 1 or not np.isfinite(b).all():
        raise ValueError("need at least one finite BIC value")
    delta = b - b.min()
    w = np.exp(-0.5 * delta)
    return w / w.sum()


def anneal(panel, config: ModelConfig) -> FitResult:
    """Best of ``config.n_anneal`` restarts by objective value.

    Restart r draws its initial affiliation with seed ``config.seed + r``;
    ties keep the earliest restart, so the result is reproducible.
    """
    values = _as_values(panel)
    T, n = values.shape
    best: FitResult | None = None
    for r in range(config.n_anneal):
        gamma0 = random_block_gamma(config.k, T, n, config.c_gamma, config.seed + r)
        result = fit(values, config, gamma0=gamma0)
        if best is None or result.objective > best.objective:
            best = result
    return best


@dataclass(frozen=True)
class GridCell:
    k: int
    c_gamma: float
    objective: float
    bic: float
    converged: bool
    schwarz: float = math.nan


@dataclass(frozen=True)
class Stage2Cell:
    scale: float
    c_lambda: tuple
    objective: float
    bic: float
    k_star: tuple


@dataclass
class SelectionReport:
    stage1: list[GridCell]
    stage2: list[Stage2Cell]
    chosen_k: int
    chosen_c_gamma: float
    chosen_c_lambda: tuple | None     # None when the unregularised fit won
    chosen_k_star: tuple
    best_fit: FitResult

    @property
    def chosen_bic(self) -> float:
        return self.best_fit.bic


def _fit_lane(args):
    values, base, k, c_grid = args
    lane = []
    prev: FitResult | None = None
    for c in c_grid:
        cfg = replace(base, k=k, c_gamma=float(c), c_lambda=math.inf)
        result = anneal(values, cfg)
        if prev is not None:
            cont = fit(values, cfg, gamma0=prev.gamma, lambda0=prev.lambdas)
            if cont.objective > result.objective:
                result = cont
        lane.append(result)
        prev = result
    return lane


def grid_search(panel, k_grid, c_gamma_grid, config: ModelConfig | None = None,
                stage2_points: int = 12, jobs: int = 1) -> SelectionReport:
    """Two-stage model selection by BIC.

    Stage 1 sweeps (K, c_gamma) with no l1 bound; within each K lane the
    previous cell's solution seeds a warm-started candidate, which keeps the
    objective monotone along the budget axis.  Stage 2 fixes the winner and
    sweeps a logarithmic grid of l1 bounds scaled per regime from the stage-1
    coefficient norms; the unregularised winner stays in the candidate set,
    so sparsification is kept only when it lowers the BIC.
    """
    values = _as_values(panel)
    base = config or ModelConfig()
    k_grid = [int(k) for k in k_grid]
    c_gamma_grid = [float(c) for c in c_gamma_grid]
    if not k_grid or not c_gamma_grid:
        raise ValueError("model grids must be nonempty")

    lane_args = [(values, base, k, c_gamma_grid) for k in k_grid]
    if jobs > 1 and len(k_grid) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(k_grid))) as pool:
            lanes = list(pool.map(_fit_lane, lane_args))
    else:
        lanes = [_fit_lane(a) for a in lane_args]

    fits: list[FitResult] = [f for lane in lanes for f in lane]
    bics = np.array([f.bic for f in fits])
    weights = schwarz_weights(bics)
    stage1 = [GridCell(k=f.config.k, c_gamma=f.config.c_gamma, objective=f.objective,
                       bic=f.bic, converged=f.converged, schwarz=float(wt))
              for f, wt in zip(fits, weights)]
    best_idx = int(np.argmin(bics))
    winner = fits[best_idx]

    stage2: list[Stage2Cell] = []
    best_fit = winner
    chosen_c_lambda: tuple | None = None
    norms = np.abs(winner.lambdas).sum(axis=1)
    if stage2_points > 0 and norms.sum() > 1e-12:
        scales = np.geomspace(0.05, 1.5, stage2_points)
        for s in scales:
            c_lam = tuple(float(s) * norms)
            cfg = replace(base, k=winner.config.k, c_gamma=winner.config.c_gamma,
                          c_lambda=c_lam)
            result = anneal(values, cfg)
            cont = fit(values, cfg, gamma0=winner.gamma, lambda0=winner.lambdas)
            if cont.objective > result.objective:
                result = cont
            k_star = tuple(sparsify(result.lambdas[k], base.eps_sparse)[1]
                           for k in range(result.k))
            stage2.append(Stage2Cell(scale=float(s), c_lambda=c_lam,
                                     objective=result.objective, bic=result.bic,
                                     k_star=k_star))
            if result.bic < best_fit.bic:
                best_fit = result
                chosen_c_lambda = c_lam

    chosen_k_star = tuple(sparsify(best_fit.lambdas[k], base.eps_sparse)[1]
                          for k in range(best_fit.k))
    return SelectionReport(
        stage1=stage1, stage2=stage2,
        chosen_k=best_fit.config.k, chosen_c_gamma=best_fit.config.c_gamma,
        chosen_c_lambda=chosen_c_lambda, chosen_k_star=chosen_k_star,
        best_fit=best_fit)
