"""Landmark detection on a dominant pulse and evaluation of feature specs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.signal import find_peaks

from ..errors import LandmarksUndetectable
from ..pulse import GRID, DominantPulse
from .grammar import LANDMARKS, FeatureSpec

SMOOTH_S = 0.025
FOOT_FRACTION = 0.25
MIN_PROMINENCE = 0.01  # fraction of the pulse range
MIN_DELAY_S = 1e-6


@dataclass(frozen=True)
class Landmark:
    time: float
    amplitude: float
    grid_index: int


@dataclass(frozen=True)
class LandmarkSet:
    points: Mapping[str, Landmark]
    qrs_reference_time: float | None = None
    smoothed: np.ndarray = field(default=None, repr=False, compare=False)
    dt: float = 0.0

    def __getitem__(self, name: str) -> Landmark:
        return self.points[name]

    def time_scaled(self, c: float) -> "LandmarkSet":
        pts = {k: replace(v, time=v.time * c) for k, v in self.points.items()}
        q = None if self.qrs_reference_time is None else self.qrs_reference_time * c
        return replace(self, points=pts, qrs_reference_time=q, dt=self.dt * c)


def symmetric_smooth(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average whose window shrinks symmetrically at the edges.

    Straight lines pass through unchanged, including near the ends.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    h = window // 2
    if h == 0 or n < 3:
        return x.copy()
    c = np.concatenate(([0.0], np.cumsum(x)))
    i = np.arange(n)
    hh = np.minimum(h, np.minimum(i, n - 1 - i))
    return (c[i + hh + 1] - c[i - hh]) / (2 * hh + 1)


def smoothing_window(dt: float) -> int:
    w = max(1, int(round(SMOOTH_S / dt)))
    return w if w % 2 else w + 1


def curvature(f: np.ndarray, dt: float) -> np.ndarray:
    """|f''| / (1 + f'^2)^(3/2) from central differences; ends copy their neighbors."""
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[1:-1] = (f[2:] - f[:-2]) / (2 * dt)
    d2[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (dt * dt)
    d1[0], d1[-1] = d1[1], d1[-2]
    d2[0], d2[-1] = d2[1], d2[-2]
    return np.abs(d2) / (1.0 + d1 * d1) ** 1.5


def detect_landmarks(dp: DominantPulse, qrs_ref: float | None = None) -> LandmarkSet:
    """Place v1, p1, v2, p2, v3, p3 on the smoothed dominant pulse.

    v1 is the lowest point in the first quarter of the beat. Later local maxima
    with at least 1% of the pulse range as prominence are peak candidates; when
    there are more than three the three most prominent are kept. Valleys are the
    minima between consecutive peaks. With only two peaks the more prominent
    one also takes the adjacent missing peak role, so two roles (and the valley
    between them) coincide.
    """
    dt = dp.mean_beat_duration / GRID
    s = symmetric_smooth(dp.samples, smoothing_window(dt))
    v1 = int(np.argmin(s[: int(GRID * FOOT_FRACTION)]))

    rng = float(np.ptp(s))
    if rng == 0:
        raise LandmarksUndetectable("flat pulse")
    peaks, props = find_peaks(s, prominence=MIN_PROMINENCE * rng)
    keep = peaks > v1
    peaks, prom = peaks[keep], props["prominences"][keep]
    if len(peaks) < 2:
        raise LandmarksUndetectable(f"{len(peaks)} peak candidates after the foot")
    if len(peaks) > 3:
        top = np.lexsort((peaks, -prom))[:3]
        top.sort()
        peaks, prom = peaks[top], prom[top]

    def valley(a: int, b: int) -> int:
        return a + int(np.argmin(s[a: b + 1]))

    if len(peaks) == 3:
        p1, p2, p3 = (int(p) for p in peaks)
        v2, v3 = valley(p1, p2), valley(p2, p3)
    elif prom[0] >= prom[1]:
        p1 = p2 = v2 = int(peaks[0])
        p3 = int(peaks[1])
        v3 = valley(p2, p3)
    else:
        p1 = int(peaks[0])
        p2 = p3 = v3 = int(peaks[1])
        v2 = valley(p1, p2)

    idx = dict(v1=v1, p1=p1, v2=v2, p2=p2, v3=v3, p3=p3)
    points = {k: Landmark(time=idx[k] * dt, amplitude=float(s[idx[k]]), grid_index=idx[k])
              for k in LANDMARKS}
    return LandmarkSet(points=points, qrs_reference_time=qrs_ref, smoothed=s, dt=dt)


def _delay(spec: FeatureSpec, lm: LandmarkSet) -> float:
    if spec.kind == "lt":
        if lm.qrs_reference_time is None:
            return float("nan")
        return lm["v1"].time - lm.qrs_reference_time
    a, b = spec.operands
    return lm[b].time - lm[a].time


def eval_feature(spec: FeatureSpec, lm: LandmarkSet, dp: DominantPulse | None = None) -> float:
    """Value of one feature; NaN marks an invalid slot.

    Latencies are in seconds, amplitudes in cm/s above the pulse minimum,
    slopes in cm/s per second and curvatures in the units of the
    (cm/s, s) plane.
    """
    k = spec.kind
    if k in ("latency", "lt"):
        return _delay(spec, lm)
    if k == "ratio":
        num, den = (_delay(d, lm) for d in spec.operands)
        if not np.isfinite(num) or not np.isfinite(den) or abs(den) < MIN_DELAY_S:
            return float("nan")
        return num / den
    s = lm.smoothed
    if k == "amplitude":
        return lm[spec.operands[0]].amplitude - float(s.min())
    if k == "curvature":
        return float(curvature(s, lm.dt)[lm[spec.operands[0]].grid_index])
    if k == "slope":
        j = spec.operands[0]
        peak, foot = lm[f"p{j}"], lm[f"v{j}"]
        dt = peak.time - foot.time
        if abs(dt) < MIN_DELAY_S:
            return float("nan")
        return (peak.amplitude - foot.amplitude) / dt
    if k == "mac":
        return float(np.mean(curvature(s, lm.dt)))
    raise ValueError(k)
