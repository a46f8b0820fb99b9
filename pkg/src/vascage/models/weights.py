"""Inverse-frequency sample weights over fixed-width age bins."""

from __future__ import annotations

import numpy as np


def age_bins(ages: np.ndarray, bin_width: float = 5.0) -> np.ndarray:
    return np.floor(np.asarray(ages, dtype=float) / bin_width).astype(np.int64)


def balanced_weights(ages, bin_width: float = 5.0) -> np.ndarray:
    """w_i = n / (B * count(bin_i)); each non-empty bin carries mass n / B."""
    ages = np.asarray(ages, dtype=float)
    if ages.size == 0:
        raise ValueError("balanced_weights needs at least one age")
    _, inverse, counts = np.unique(age_bins(ages, bin_width), return_inverse=True, return_counts=True)
    n, B = len(ages), len(counts)
    return n / (B * counts[inverse].astype(float))


def normalize_weights(w, n: int) -> np.ndarray:
    """Rescale to mean 1. Scaling every weight by a power of two is a bitwise no-op."""
    if w is None:
        return np.ones(n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and positive")
    return w * n / w.sum()
