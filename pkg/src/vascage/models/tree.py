"""Weighted least-squares regression tree (the building block of both ensembles)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f != LEAF
            if not inner.any():
                break
            r, n = rows[inner], node[inner]
            go_left = X[r, f[inner]] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])
        return self.value[node]

    def to_json(self) -> dict:
        return {
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=float),
        )


def best_split(X: np.ndarray, y: np.ndarray, w: np.ndarray, features: np.ndarray,
               min_samples_leaf: int = 1):
    """Exhaustive weighted-variance split search over ``features``.

    Returns ``(gain, feature, threshold)`` maximizing the drop in weighted
    squared error, or ``None`` when no admissible split exists. Candidate
    thresholds are midpoints between consecutive distinct values.
    """
    n = len(y)
    if n < 2 * min_samples_leaf or len(features) == 0:
        return None
    W = w.sum()
    yc = y - (w @ y) / W
    Xs = X[:, features]
    order = np.argsort(Xs, axis=0, kind="stable")
    xs = np.take_along_axis(Xs, order, axis=0)
    ws = w[order]
    wy = ws * yc[order]
    WL = np.cumsum(ws, axis=0)[:-1]
    SL = np.cumsum(wy, axis=0)[:-1]
    WR = W - WL
    SR = wy.sum(axis=0) - SL
    with np.errstate(divide="ignore", invalid="ignore"):
        score = SL * SL / WL + SR * SR / WR
    pos = np.arange(1, n)[:, None]
    ok = (xs[1:] > xs[:-1]) & (pos >= min_samples_leaf) & (n - pos >= min_samples_leaf)
    ok &= (WL > 0) & (WR > 0)
    if not ok.any():
        return None
    score = np.where(ok, score, -np.inf)
    flat = int(np.argmax(score))
    i, j = divmod(flat, len(features))
    parent = (w @ yc) ** 2 / W
    gain = float(score[i, j] - parent)
    lo, hi = xs[i, j], xs[i + 1, j]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return gain, int(features[j]), float(thr)


def fit_tree(X: np.ndarray, y: np.ndarray, w: np.ndarray, max_depth: int,
             min_samples_leaf: int = 1, max_features: int | None = None,
             rng: np.random.Generator | None = None) -> Tree:
    """Grow a tree depth-first; leaves hold the weighted mean of ``y``."""
    n, p = X.shape
    k = p if max_features is None else min(max(1, max_features), p)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(w[idx] @ y[idx] / w[idx].sum()))
        return len(feature) - 1

    root = np.arange(n)
    stack = [(new_node(root), root, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) < 2 * min_samples_leaf:
            continue
        yi, wi = y[idx], w[idx]
        centred = yi - value[node]
        sse = float(wi @ (centred * centred))
        if sse <= 1e-12 * max(1.0, float(wi @ (yi * yi))):
            continue
        if k < p:
            feats = np.sort(rng.choice(p, size=k, replace=False))
        else:
            feats = np.arange(p)
        found = best_split(X[idx], yi, wi, feats, min_samples_leaf)
        if found is None or found[0] <= 1e-12 * sse:
            continue
        _, f, thr = found
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
    )
