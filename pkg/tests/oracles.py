"""Independent brute-force reference implementations.

Written with plain Python loops and ``math`` so they share no code path with
the vectorized package functions they check.
"""

from __future__ import annotations

import math


def mean(xs):
    return math.fsum(xs) / len(xs)


def sample_std(xs):
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def standardize(rows):
    n, p = len(rows), len(rows[0])
    Z = [[0.0] * p for _ in range(n)]
    for j in range(p):
        col = [rows[i][j] for i in range(n)]
        if all(c == col[0] for c in col):
            continue
        m, s = mean(col), sample_std(col)
        for i in range(n):
            Z[i][j] = (rows[i][j] - m) / s
    return Z


def group_means(Z, labels, groups):
    out = []
    for g in groups:
        members = [Z[i] for i in range(len(Z)) if labels[i] == g]
        out.append([mean([r[j] for r in members]) for j in range(len(Z[0]))])
    return out


def group_variance(M):
    G = len(M)
    V = []
    for j in range(len(M[0])):
        col = [M[g][j] for g in range(G)]
        m = mean(col)
        V.append(math.fsum((c - m) ** 2 for c in col) / (G - 1))
    return V


def top_k(V, K, constant=()):
    idx = [j for j in range(len(V)) if j not in set(constant)]
    # selection sort: repeatedly take the largest, lowest index first
    chosen = []
    for _ in range(K):
        best = None
        for j in idx:
            if j in chosen:
                continue
            if best is None or V[j] > V[best]:
                best = j
        chosen.append(best)
    return chosen


def hrv(rr):
    n = len(rr)
    m = mean(rr)
    sdnn = math.sqrt(math.fsum((x - m) ** 2 for x in rr) / (n - 1))
    d = [rr[i + 1] - rr[i] for i in range(n - 1)]
    rmssd = math.sqrt(math.fsum(x * x for x in d) / len(d))
    if len(d) > 1:
        md = mean(d)
        sdsd = math.sqrt(math.fsum((x - md) ** 2 for x in d) / (len(d) - 1))
    else:
        sdsd = 0.0
    nn50 = sum(1 for x in d if abs(x) > 50)
    nn20 = sum(1 for x in d if abs(x) > 20)
    return {
        "MeanNN": m, "SDNN": sdnn, "RMSSD": rmssd, "SDSD": sdsd,
        "pNN50": nn50 / len(d), "pNN20": nn20 / len(d), "CVNN": sdnn / m,
        "MeanHR": mean([60000.0 / x for x in rr]),
    }


def balanced_weights(ages, width=5.0):
    bins = [math.floor(a / width) for a in ages]
    counts = {}
    for b in bins:
        counts[b] = counts.get(b, 0) + 1
    n, B = len(ages), len(counts)
    return [n / (B * counts[b]) for b in bins]


def best_split(X, y, w):
    """Try every (feature, midpoint) pair; return the lowest weighted SSE split."""
    n, p = len(X), len(X[0])

    def sse(idx):
        W = math.fsum(w[i] for i in idx)
        mu = math.fsum(w[i] * y[i] for i in idx) / W
        return math.fsum(w[i] * (y[i] - mu) ** 2 for i in idx)

    best = None
    for j in range(p):
        vals = sorted(set(X[i][j] for i in range(n)))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2
            left = [i for i in range(n) if X[i][j] <= thr]
            right = [i for i in range(n) if X[i][j] > thr]
            cost = sse(left) + sse(right)
            if best is None or cost < best[0] - 1e-12:
                best = (cost, j, thr)
    return best


def mae(p, t):
    return math.fsum(abs(a - b) for a, b in zip(p, t)) / len(p)


def gap_stats(gaps):
    n = len(gaps)
    m = mean(gaps)
    std = math.sqrt(math.fsum((g - m) ** 2 for g in gaps) / (n - 1)) if n > 1 else 0.0
    return {"proportion_positive": sum(1 for g in gaps if g > 0) / n, "mean_gap": m, "std_gap": std}
