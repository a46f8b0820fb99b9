"""Rank features by the spread of their standardized group means."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyGroup, KTooLarge


@dataclass(frozen=True)
class RankingResult:
    V: np.ndarray
    order: np.ndarray
    top_k: list[str]
    constant_features: list[str]
    top_indices: np.ndarray


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Column z-scores with the sample (N-1) standard deviation.

    Returns ``(Z, mu, sigma, constant)``. Columns whose values are all equal
    get ``sigma = 0``, ``z = 0`` and ``constant = True``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardize needs a 2-D matrix with at least 2 rows")
    mu = X.mean(axis=0)
    constant = np.all(X == X[0], axis=0)
    sigma = np.where(constant, 0.0, np.sqrt(((X - mu) ** 2).sum(axis=0) / (X.shape[0] - 1)))
    safe = np.where(constant, 1.0, sigma)
    Z = np.where(constant, 0.0, (X - mu) / safe)
    return Z, mu, sigma, constant


def group_means(Z: np.ndarray, labels: Sequence, groups: Sequence | None = None) -> tuple[np.ndarray, list]:
    """Row ``g`` holds the mean of ``Z`` over samples labelled ``groups[g]``."""
    labels = np.asarray(labels)
    if groups is None:
        groups = sorted(set(labels.tolist()), key=str)
    rows = []
    for g in groups:
        mask = labels == g
        if not mask.any():
            raise EmptyGroup(f"group {g!r} has no samples")
        rows.append(Z[mask].mean(axis=0))
    return np.vstack(rows), list(groups)


def group_variance(M: np.ndarray) -> np.ndarray:
    """Sample variance (G-1 denominator) of the group means, per feature."""
    M = np.asarray(M, dtype=float)
    G = M.shape[0]
    if G < 2:
        raise ValueError("group variance needs at least 2 groups")
    centre = M.mean(axis=0)
    return ((M - centre) ** 2).sum(axis=0) / (G - 1)


def top_k(V: np.ndarray, names: Sequence[str], K: int = 10,
          constant: np.ndarray | None = None) -> RankingResult:
    """Descending by V, ties to the lower index; constant features come last and are ineligible."""
    V = np.asarray(V, dtype=float)
    constant = np.zeros(len(V), bool) if constant is None else np.asarray(constant, bool)
    eligible = np.flatnonzero(~constant)
    if K > len(eligible):
        raise KTooLarge(f"K={K} but only {len(eligible)} non-constant features")
    ranked = eligible[np.argsort(-V[eligible], kind="stable")]
    order = np.concatenate([ranked, np.flatnonzero(constant)])
    top = ranked[:K]
    return RankingResult(
        V=V, order=order, top_k=[names[i] for i in top],
        constant_features=[names[i] for i in np.flatnonzero(constant)],
        top_indices=top,
    )


def rank_features(X: np.ndarray, labels: Sequence, names: Sequence[str], K: int = 10,
                  groups: Sequence | None = None) -> tuple[RankingResult, np.ndarray, list]:
    """standardize -> group_means -> group_variance -> top_k."""
    Z, _, _, constant = standardize(X)
    M, groups = group_means(Z, labels, groups)
    V = group_variance(M)
    return top_k(V, names, K, constant), M, groups
