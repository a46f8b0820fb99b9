"""Beat slicing and the dominant (representative) pulse of an entry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from .errors import EmptyGroup, NoDominantCluster
from .ingest import EntrySegment

GRID = 400
CUT_DISTANCE = 0.05
MIN_DOMINANCE = 0.3
MIN_BEATS = 30


@dataclass(frozen=True)
class BeatWaveform:
    samples: np.ndarray
    original_duration: float
    onset: int = 0

    def __post_init__(self):
        if self.samples.shape != (GRID,) or not np.all(np.isfinite(self.samples)):
            raise ValueError(f"beat waveform must be {GRID} finite samples")


@dataclass(frozen=True)
class DominantPulse:
    samples: np.ndarray
    member_count: int
    total_beats: int
    mean_beat_duration: float
    members: tuple[int, ...] = field(default=(), compare=False)
    cluster_sizes: tuple[int, ...] = field(default=(), compare=False)


def normalize_beat(segment: np.ndarray, n_samples: int) -> np.ndarray:
    """Resample one beat onto the fixed grid.

    ``segment`` holds the beat's samples plus the next onset sample, so grid
    point ``i`` sits at ``i * n_samples / GRID`` samples from the onset. A beat
    of exactly ``GRID`` samples maps onto itself.
    """
    pos = np.arange(GRID) * (n_samples / GRID)
    return np.interp(pos, np.arange(len(segment)), segment)


def extract_beats(entry: EntrySegment) -> list[BeatWaveform]:
    beats = []
    on = entry.beat_onsets
    for a, b in zip(on[:-1], on[1:]):
        seg = entry.samples[a: b + 1]
        beats.append(BeatWaveform(normalize_beat(seg, int(b - a)), (b - a) / entry.fs, int(a)))
    return beats


def _correlation(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = np.sqrt((a @ a) * (b @ b))
    return float(a @ b / den) if den > 0 else 0.0


def _canonical_mean(rows: np.ndarray) -> np.ndarray:
    """Pointwise mean in a row order that does not depend on input order."""
    order = np.lexsort(rows.T[::-1])
    return rows[order].mean(axis=0)


def cluster_beats(X: np.ndarray, cut: float = CUT_DISTANCE) -> np.ndarray:
    """Average-linkage labels under correlation distance, tree cut at ``cut``.

    Rows are processed in a canonical order so the partition cannot depend on
    how the beats were listed.
    """
    n = len(X)
    if n == 1:
        return np.ones(1, dtype=int)
    order = np.lexsort(X.T[::-1])
    d = pdist(X[order], metric="correlation")
    d = np.nan_to_num(d, nan=1.0)
    d = np.clip(d, 0.0, 2.0)
    labels_sorted = fcluster(linkage(d, method="average"), t=cut, criterion="distance")
    labels = np.empty(n, dtype=int)
    labels[order] = labels_sorted
    return labels


def dominant_pulse(beats: Sequence[BeatWaveform], cut: float = CUT_DISTANCE,
                   min_beats: int = MIN_BEATS, min_dominance: float = MIN_DOMINANCE) -> DominantPulse:
    """Mean waveform of the largest correlation cluster of beats.

    Equal-sized largest clusters are separated by how well their means
    correlate with the grand mean of all beats.
    """
    if len(beats) < min_beats:
        raise NoDominantCluster(f"{len(beats)} beats, need {min_beats}")
    X = np.stack([b.samples for b in beats])
    labels = cluster_beats(X, cut)
    ids, sizes = np.unique(labels, return_counts=True)
    top = sizes.max()
    tied = ids[sizes == top]
    if len(tied) > 1:
        grand = _canonical_mean(X)
        scores = [(_correlation(_canonical_mean(X[labels == c]), grand), c) for c in tied]
        best = max(scores, key=lambda s: s[0])[1]
    else:
        best = tied[0]
    if top < np.ceil(min_dominance * len(beats)):
        raise NoDominantCluster(f"largest cluster holds {top}/{len(beats)} beats")
    members = np.flatnonzero(labels == best)
    durations = np.array([beats[i].original_duration for i in members])
    return DominantPulse(
        samples=_canonical_mean(X[members]),
        member_count=int(len(members)),
        total_beats=len(beats),
        mean_beat_duration=float(np.sort(durations).mean()),
        members=tuple(int(i) for i in members),
        cluster_sizes=tuple(sorted((int(s) for s in sizes), reverse=True)),
    )


def average_dominant_pulse(pulses: Sequence[DominantPulse]) -> np.ndarray:
    if len(pulses) == 0:
        raise EmptyGroup("no dominant pulses to average")
    return np.mean(np.stack([p.samples for p in pulses]), axis=0)
