"""Gradient-boosted regression trees under squared loss."""

from __future__ import annotations

import numpy as np

from .tree import Tree, fit_tree

DEFAULTS = {"n_trees": 500, "max_depth": 3, "learning_rate": 0.05, "min_samples_leaf": 1}


def fit_gbt(X, y, w, hp: dict) -> tuple[float, list[Tree], list[float]]:
    """Returns ``(base, trees, loss_history)``.

    ``base`` is the weighted mean of ``y``; each round fits a tree to the
    current residuals with the same weights and adds ``learning_rate`` times
    its output. ``loss_history[r]`` is the weighted mean squared error after
    ``r`` rounds.
    """
    W = w.sum()
    base = float(w @ y / W)
    F = np.full(len(y), base)
    trees, history = [], []
    r = y - F
    history.append(float(w @ (r * r) / W))
    for _ in range(hp["n_trees"]):
        tree = fit_tree(X, r, w, hp["max_depth"], hp["min_samples_leaf"])
        F = F + hp["learning_rate"] * tree.predict(X)
        r = y - F
        trees.append(tree)
        history.append(float(w @ (r * r) / W))
    return base, trees, history


def predict_gbt(base: float, trees: list[Tree], lr: float, X: np.ndarray) -> np.ndarray:
    F = np.full(len(X), base)
    for t in trees:
        F = F + lr * t.predict(X)
    return F
