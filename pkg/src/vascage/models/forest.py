"""Random forest regressor with weight-proportional bootstrap."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .tree import Tree, fit_tree

DEFAULTS = {"n_trees": 300, "max_depth": 12, "max_features": "third",
            "min_samples_leaf": 1, "bootstrap": True}


def resolve_max_features(spec, p: int) -> int:
    if spec in (None, "all"):
        return p
    if spec == "third":
        return max(1, math.ceil(p / 3))
    return min(p, max(1, int(spec)))


def weighted_bootstrap(w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw n indices with probability proportional to ``w``; returns per-row multiplicities."""
    n = len(w)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(n), side="right")
    return np.bincount(np.minimum(draws, n - 1), minlength=n).astype(float)


def _fit_one(args) -> Tree:
    X, y, w, i, seed, hp = args
    rng = np.random.default_rng(seed ^ i)
    if hp["bootstrap"]:
        counts = weighted_bootstrap(w, rng)
        rows = np.flatnonzero(counts)
        Xb, yb, wb = X[rows], y[rows], counts[rows]
    else:
        Xb, yb, wb = X, y, w
    return fit_tree(Xb, yb, wb, hp["max_depth"], hp["min_samples_leaf"],
                    resolve_max_features(hp["max_features"], X.shape[1]), rng)


def fit_forest(X, y, w, seed: int, hp: dict, jobs: int = 1) -> list[Tree]:
    """Each tree draws from its own generator seeded with ``seed ^ tree_index``."""
    tasks = [(X, y, w, i, seed, hp) for i in range(hp["n_trees"])]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_fit_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_fit_one(t) for t in tasks]


def predict_forest(trees: list[Tree], X: np.ndarray) -> np.ndarray:
    return np.mean([t.predict(X) for t in trees], axis=0)
