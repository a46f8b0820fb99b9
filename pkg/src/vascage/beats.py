"""R-peak detection, R-R intervals and CBFV pulse-foot detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import butter, filtfilt, find_peaks

from .errors import NoBeatsFound, SignalTooShort, TooFewPeaks

RR_MIN_MS = 300.0
RR_MAX_MS = 2000.0
ECTOPIC_TOLERANCE = 0.20
ECTOPIC_WINDOW = 5


@dataclass
class BeatAnnotations:
    pulse_onsets: dict[str, np.ndarray]
    r_peaks: np.ndarray | None = None
    rr_intervals: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "r_peaks": None if self.r_peaks is None else self.r_peaks.tolist(),
            "rr_intervals_ms": None if self.rr_intervals is None else self.rr_intervals.tolist(),
            "pulse_onsets": {k: v.tolist() for k, v in sorted(self.pulse_onsets.items())},
        }


def _centered_window(fs: float, seconds: float) -> int:
    return max(1, int(round(seconds * fs)))


def _odd_window(fs: float, seconds: float) -> int:
    """Odd-length window so centered smoothing has no half-sample shift."""
    n = _centered_window(fs, seconds)
    return n if n % 2 else n + 1


def detect_qrs(ecg: np.ndarray, fs: float = 400.0) -> np.ndarray:
    """Pan-Tompkins style R-peak detector.

    Band-pass 5-15 Hz, differentiate, square, 150 ms moving-window integration,
    then an adaptive dual threshold (signal/noise running levels with
    search-back) and a 200 ms refractory period. Each accepted QRS is placed on
    the local maximum of the low-passed ECG.
    """
    ecg = np.asarray(ecg, dtype=float)
    if len(ecg) < 2 * fs:
        raise SignalTooShort(f"{len(ecg) / fs:.2f} s of ECG, need 2 s")

    b, a = butter(2, [5.0 / (fs / 2), 15.0 / (fs / 2)], btype="band")
    band = filtfilt(b, a, ecg - np.median(ecg))
    deriv = np.gradient(band)
    mwi = uniform_filter1d(deriv ** 2, _odd_window(fs, 0.150), mode="constant")
    if not np.any(mwi > 0):
        return np.array([], dtype=np.int64)

    refractory = int(round(0.200 * fs))
    cands, _ = find_peaks(mwi, distance=refractory)
    if len(cands) == 0:
        return np.array([], dtype=np.int64)
    heights = mwi[cands]

    train = mwi[: int(2 * fs)]
    spki = train.max() / 3.0
    npki = train.mean() / 2.0
    qrs: list[int] = []
    skipped: list[int] = []
    rr_recent: list[int] = []
    for c, h in zip(cands, heights):
        thr1 = npki + 0.25 * (spki - npki)
        if qrs and len(rr_recent) >= 2:
            rr_avg = float(np.mean(rr_recent[-8:]))
            if c - qrs[-1] > 1.66 * rr_avg:
                thr2 = 0.5 * thr1
                back = [s for s in skipped if s - qrs[-1] >= refractory and c - s >= refractory
                        and mwi[s] > thr2]
                if back:
                    s = max(back, key=lambda k: (mwi[k], -k))
                    spki = 0.25 * mwi[s] + 0.75 * spki
                    rr_recent.append(s - qrs[-1])
                    qrs.append(s)
                    skipped = [k for k in skipped if k > s]
        if h > thr1 and (not qrs or c - qrs[-1] >= refractory):
            spki = 0.125 * h + 0.875 * spki
            if qrs:
                rr_recent.append(c - qrs[-1])
            qrs.append(int(c))
            skipped = []
        else:
            npki = 0.125 * h + 0.875 * npki
            skipped.append(int(c))

    # place each detection on the R maximum of the low-passed trace
    bl, al = butter(2, 40.0 / (fs / 2), btype="low")
    smooth = filtfilt(bl, al, ecg)
    half = int(round(0.075 * fs))
    peaks = []
    for q in qrs:
        lo, hi = max(0, q - half), min(len(ecg), q + half + 1)
        peaks.append(lo + int(np.argmax(smooth[lo:hi])))
    peaks = np.unique(np.asarray(peaks, dtype=np.int64))
    if len(peaks) > 1:
        keep = np.concatenate(([True], np.diff(peaks) >= refractory))
        peaks = peaks[keep]
    return peaks


def _running_median(x: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    return np.array([np.median(x[max(0, i - half): i + half + 1]) for i in range(len(x))])


def rr_intervals(r_peaks: np.ndarray, fs: float = 400.0) -> np.ndarray:
    """R-R intervals in ms after the range and ectopic filters.

    Intervals outside [300, 2000] ms are dropped first; of the rest, any
    interval deviating more than 20% from the centered running median of 5 is
    treated as ectopic and dropped.
    """
    r_peaks = np.asarray(r_peaks)
    if len(r_peaks) < 2:
        raise TooFewPeaks(f"{len(r_peaks)} R-peaks, need 2")
    rr = np.diff(r_peaks).astype(float) / fs * 1000.0
    rr = rr[(rr >= RR_MIN_MS) & (rr <= RR_MAX_MS)]
    if len(rr) == 0:
        return rr
    med = _running_median(rr, ECTOPIC_WINDOW)
    return rr[np.abs(rr - med) <= ECTOPIC_TOLERANCE * med]


def _latest_argmin(x: np.ndarray, lo: int, hi: int) -> int:
    """Index of the minimum of ``x[lo:hi]``; ties go to the latest sample (end of a flat stretch)."""
    return hi - 1 - int(np.argmin(x[lo:hi][::-1]))


def detect_pulse_onsets(cbfv: np.ndarray, fs: float = 400.0) -> np.ndarray:
    """Pulse feet: maxima of the smoothed upstroke slope, backtracked to the minimum.

    The slope is taken on a 25 ms moving average. Upstroke maxima closer than
    300 ms are merged and weak ones (below 40% of the typical upstroke) are
    discarded. From each upstroke the smoothed trace is followed downhill to
    its preceding minimum, which is then refined to the lowest point of a
    lightly smoothed (5 ms) trace within half a smoothing window and finally
    to the raw minimum next to it.
    """
    x = np.asarray(cbfv, dtype=float)
    if len(x) < 3 or np.ptp(x) == 0:
        raise NoBeatsFound("flat signal")
    smooth = uniform_filter1d(x, _odd_window(fs, 0.025), mode="nearest")
    slope = np.gradient(smooth)
    refractory = int(round(0.300 * fs))
    cands, _ = find_peaks(slope, distance=refractory)
    cands = cands[slope[cands] > 0]
    if len(cands) == 0:
        raise NoBeatsFound("no upstrokes")
    typical = np.percentile(slope[cands], 80)
    ups = cands[slope[cands] >= 0.4 * typical]

    fine_w = _odd_window(fs, 0.005)
    fine = uniform_filter1d(x, fine_w, mode="nearest")
    half = _odd_window(fs, 0.025) // 2
    onsets = []
    for u in ups:
        i = u
        while i > 0 and smooth[i - 1] < smooth[i]:
            i -= 1
        j = _latest_argmin(fine, max(0, i - half), min(len(x), i + half + 1))
        # smoothing drags an asymmetric foot toward its slower side; snap back
        # to the raw minimum within the smoothing half-width
        onsets.append(_latest_argmin(x, max(0, j - fine_w // 2), min(len(x), j + fine_w // 2 + 1)))
    onsets = np.unique(np.asarray(onsets, dtype=np.int64))
    if len(onsets) > 1:
        keep = np.concatenate(([True], np.diff(onsets) >= refractory))
        onsets = onsets[keep]
    if len(onsets) == 0:
        raise NoBeatsFound("no pulse feet")
    return onsets
