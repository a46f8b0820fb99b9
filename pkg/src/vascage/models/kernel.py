"""Weighted RBF kernel ridge regression."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve
from scipy.spatial.distance import cdist, pdist

from ..errors import DegenerateTarget

DEFAULTS = {"ridge": 1e-2, "bandwidth": "median"}


def _scale(X, mu, sd):
    return (X - mu) / sd


def fit_kernel_ridge(X, y, w, hp: dict) -> dict:
    """Solve (diag(w) K + ridge I) alpha = w (y - ybar_w) on standardized inputs.

    This is the stationarity condition of
    sum_i w_i (y_i - ybar_w - f(x_i))^2 + ridge * alpha' K alpha.
    """
    if np.all(y == y[0]):
        raise DegenerateTarget("all training targets are equal")
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Z = _scale(X, mu, sd)
    if hp["bandwidth"] == "median":
        d = pdist(Z)
        h = float(np.median(d[d > 0])) if np.any(d > 0) else 1.0
    else:
        h = float(hp["bandwidth"])
    gamma = 1.0 / (2.0 * h * h)
    K = np.exp(-gamma * cdist(Z, Z, "sqeuclidean"))
    ybar = float(w @ y / w.sum())
    A = w[:, None] * K + hp["ridge"] * np.eye(len(y))
    alpha = solve(A, w * (y - ybar))
    return {"mu": mu.tolist(), "sd": sd.tolist(), "gamma": gamma, "bandwidth": h,
            "intercept": ybar, "alpha": alpha.tolist(), "support": Z.tolist()}


def predict_kernel_ridge(state: dict, X: np.ndarray) -> np.ndarray:
    Z = _scale(X, np.asarray(state["mu"]), np.asarray(state["sd"]))
    S = np.asarray(state["support"])
    K = np.exp(-state["gamma"] * cdist(Z, S, "sqeuclidean"))
    return state["intercept"] + K @ np.asarray(state["alpha"])
