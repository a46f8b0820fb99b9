"""Time-domain heart rate variability."""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from ..errors import TooFewIntervals

HRV_NAMES = ("MeanNN", "SDNN", "RMSSD", "SDSD", "pNN50", "pNN20", "CVNN", "MeanHR")


@dataclass(frozen=True)
class HrvFeatures:
    MeanNN: float
    SDNN: float
    RMSSD: float
    SDSD: float
    pNN50: float
    pNN20: float
    CVNN: float
    MeanHR: float

    def values(self) -> tuple[float, ...]:
        return astuple(self)


def hrv_features(rr: np.ndarray, min_intervals: int = 10) -> HrvFeatures:
    """Eight time-domain measures from filtered R-R intervals in ms.

    SDNN and SDSD use the N-1 denominator; SDSD of a single successive
    difference is 0. pNN50/pNN20 are fractions of successive differences
    strictly above 50/20 ms. MeanHR averages the instantaneous rate 60000/RR.
    """
    rr = np.asarray(rr, dtype=float)
    if len(rr) < max(min_intervals, 2):
        raise TooFewIntervals(f"{len(rr)} intervals, need {max(min_intervals, 2)}")
    mean_nn = float(rr.mean())
    sdnn = float(rr.std(ddof=1))
    diff = np.diff(rr)
    rmssd = float(np.sqrt(np.mean(diff ** 2)))
    sdsd = float(diff.std(ddof=1)) if len(diff) > 1 else 0.0
    adiff = np.abs(diff)
    return HrvFeatures(
        MeanNN=mean_nn,
        SDNN=sdnn,
        RMSSD=rmssd,
        SDSD=sdsd,
        pNN50=float(np.mean(adiff > 50.0)),
        pNN20=float(np.mean(adiff > 20.0)),
        CVNN=sdnn / mean_nn,
        MeanHR=float(np.mean(60000.0 / rr)),
    )
