"""Lossless JSON serialisation of fitted models.

The document stores the scaling maps, per-regime coefficients with their
log-partitions, the affiliation field (run-length encoded per dimension),
the configuration and the fit summary.  Serialisation is canonical (sorted
keys, no whitespace), so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .estimator import FitResult, ModelConfig
from .lambda_step import sparsify
from .panel import ScalingMap

SCHEMA_VERSION = 1


def _rle_encode(gamma: np.ndarray) -> list:
    """Per dimension: runs of consecutive equal affiliation vectors."""
    K, T, n = gamma.shape
    dims = []
    for i in range(n):
        runs = []
        t = 0
        while t < T:
            vec = gamma[:, t, i]
            length = 1
            while t + length < T and np.array_equal(gamma[:, t + length, i], vec):
                length += 1
            runs.append([length, [float(v) for v in vec]])
            t += length
        dims.append(runs)
    return dims


def _rle_decode(dims: list, K: int) -> np.ndarray:
    n = len(dims)
    cols = []
    for runs in dims:
        col = np.concatenate([np.tile(np.asarray(vec, dtype=float)[:, None], (1, length))
                              for length, vec in runs], axis=1)
        cols.append(col)
    T = cols[0].shape[1]
    gamma = np.empty((K, T, n))
    for i, col in enumerate(cols):
        gamma[:, :, i] = col
    return gamma


def model_to_obj(fit_result: FitResult, scaling: ScalingMap, labels=None) -> dict:
    cfg = fit_result.config
    c_lam = cfg.c_lambda_per_regime()
    k_star = [sparsify(fit_result.lambdas[k], cfg.eps_sparse)[1]
              for k in range(fit_result.k)]
    return {
        "schema": SCHEMA_VERSION,
        "labels": list(labels) if labels else [f"x{i + 1}" for i in range(fit_result.shape[1])],
        "scaling": {"a": [float(v) for v in scaling.a],
                    "b": [float(v) for v in scaling.b]},
        "config": {
            "k": cfg.k,
            "c_gamma": cfg.c_gamma,
            "c_lambda": [None if math.isinf(v) else float(v) for v in c_lam],
            "m": cfg.m,
            "n_anneal": cfg.n_anneal,
            "quad_order": cfg.quad_order,
            "tol_outer": cfg.tol_outer,
            "max_outer_iter": cfg.max_outer_iter,
            "seed": cfg.seed,
            "eps_sparse": cfg.eps_sparse,
        },
        "lambda": [[float(v) for v in row] for row in fit_result.lambdas],
        "log_z": [float(v) for v in fit_result.log_z],
        "gamma_rle": _rle_encode(fit_result.gamma),
        "objective": float(fit_result.objective),
        "bic": float(fit_result.bic),
        "param_count": fit_result.param_count,
        "k_star": k_star,
        "converged": fit_result.converged,
        "degenerate": fit_result.degenerate,
        "trace": [float(v) for v in fit_result.trace],
    }


def obj_to_model(obj: dict) -> tuple[FitResult, ScalingMap, list[str]]:
    if obj.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema: {obj.get('schema')!r}")
    cfg_obj = obj["config"]
    config = ModelConfig(
        k=cfg_obj["k"],
        c_gamma=cfg_obj["c_gamma"],
        c_lambda=tuple(math.inf if v is None else float(v) for v in cfg_obj["c_lambda"]),
        m=cfg_obj["m"],
        n_anneal=cfg_obj["n_anneal"],
        quad_order=cfg_obj["quad_order"],
        tol_outer=cfg_obj["tol_outer"],
        max_outer_iter=cfg_obj["max_outer_iter"],
        seed=cfg_obj["seed"],
        eps_sparse=cfg_obj["eps_sparse"],
    )
    gamma = _rle_decode(obj["gamma_rle"], config.k)
    fit_result = FitResult(
        gamma=gamma,
        lambdas=np.asarray(obj["lambda"], dtype=float),
        log_z=np.asarray(obj["log_z"], dtype=float),
        objective=obj["objective"],
        bic=obj["bic"],
        param_count=obj["param_count"],
        trace=list(obj["trace"]),
        converged=obj["converged"],
        degenerate=obj["degenerate"],
        config=config,
        n_outer=len(obj["trace"]),
    )
    scaling = ScalingMap(a=np.asarray(obj["scaling"]["a"], dtype=float),
                         b=np.asarray(obj["scaling"]["b"], dtype=float))
    return fit_result, scaling, list(obj["labels"])


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_json_atomic(path: str, obj) -> None:
    """Serialise canonically and replace the target file in one step."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps_canonical(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(path: str, fit_result: FitResult, scaling: ScalingMap, labels=None) -> None:
    write_json_atomic(path, model_to_obj(fit_result, scaling, labels))


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        return obj_to_model(json.load(fh))
