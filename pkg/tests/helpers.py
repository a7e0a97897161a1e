"""Shared fixtures for the acceptance studies (top-level so worker processes
can import them)."""

from __future__ import annotations

import numpy as np

import tventropy as tv
from tventropy import ModelConfig


def synthetic_study(args):
    """One seed of the two-regime recovery study: BIC-select the switch
    budget for K=2 over c_gamma in 1..10 and score the winner."""
    seed, v2, n_anneal = args
    case = tv.gen_two_regime_gaussian(v2, T=1000, switch_period=250, seed=seed)
    scaled, scaling = tv.rescale(case.panel)
    report = tv.grid_search(scaled.values, [2], list(range(1, 11)),
                            config=ModelConfig(m=6, n_anneal=n_anneal, seed=seed),
                            stage2_points=0)
    best = report.best_fit
    ce = tv.classification_error(case.gamma_true, best.gamma)
    v_est = tv.variance_path(best, scaling, 0)
    re_tv = tv.relative_error(case.v_true, v_est)
    re_gmw = tv.relative_error(case.v_true,
                               tv.gmw_variance(case.panel.values[:, 0], 50))
    return ce, re_tv, re_gmw


def selection_study(args):
    """One seed of stage-1 model selection over {K=1..3} x {c_gamma=1..10}."""
    seed, v2, n_anneal = args
    case = tv.gen_two_regime_gaussian(v2, T=1000, switch_period=250, seed=seed)
    scaled, _ = tv.rescale(case.panel)
    report = tv.grid_search(scaled.values, [1, 2, 3], list(range(1, 11)),
                            config=ModelConfig(m=6, n_anneal=n_anneal, seed=seed),
                            stage2_points=0)
    return report.chosen_k


def random_fit_trace(args):
    """Trace of one randomised fit, for the monotonicity sweep."""
    seed, = args if isinstance(args, tuple) else (args,)
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 4))
    n = int(rng.integers(1, 3))
    T = int(rng.integers(120, 320))
    v2 = float(rng.uniform(1.5, 8.0))
    period = int(rng.integers(30, 120))
    cols = []
    for i in range(n):
        case = tv.gen_two_regime_gaussian(v2, T=T, switch_period=period,
                                          seed=seed + 31 * i)
        cols.append(case.panel.values[:, 0])
    panel = tv.Panel(values=np.column_stack(cols))
    scaled, _ = tv.rescale(panel)
    config = ModelConfig(k=k, c_gamma=float(rng.integers(0, 7)),
                         m=int(rng.integers(2, 7)), seed=seed)
    result = tv.fit(scaled.values, config)
    return result.trace
