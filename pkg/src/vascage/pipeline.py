"""Per-subject feature extraction: recording in, 137-value vector out."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beats import BeatAnnotations, detect_pulse_onsets, detect_qrs, rr_intervals
from .errors import NoValidSide, PipelineError
from .features import (
    FeatureManifest,
    FeatureVector,
    LandmarkSet,
    assemble_vector,
    detect_landmarks,
    hrv_features,
    validity_check,
)
from .ingest import SIDES, EntrySegment, Recording, quality_check, resample_to_400hz, segment_entries
from .pulse import DominantPulse, dominant_pulse, extract_beats


@dataclass
class SubjectResult:
    subject_id: str
    group: str
    age: float
    vector: FeatureVector | None
    valid: bool
    notes: list[str] = field(default_factory=list)
    beats: BeatAnnotations | None = None
    pulses: dict[str, DominantPulse] = field(default_factory=dict)
    landmarks: dict[str, LandmarkSet] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "valid" if self.valid else "invalid"


def qrs_reference_time(entry: EntrySegment, members) -> float | None:
    """Mean offset (s, <= 0) from each member beat's onset back to the R-peak preceding it."""
    if entry.qrs_peaks is None or len(entry.qrs_peaks) == 0:
        return None
    q = np.sort(np.asarray(entry.qrs_peaks))
    offsets = []
    for i in members:
        onset = entry.beat_onsets[i]
        k = np.searchsorted(q, onset, side="right") - 1
        if k >= 0:
            offsets.append((q[k] - onset) / entry.fs)
    return float(np.mean(offsets)) if offsets else None


def side_artifacts(entry: EntrySegment) -> tuple[LandmarkSet, DominantPulse]:
    dp = dominant_pulse(extract_beats(entry))
    return detect_landmarks(dp, qrs_reference_time(entry, dp.members)), dp


def extract_subject(rec: Recording, manifest: FeatureManifest) -> SubjectResult:
    """Run one recording through quality check, beat detection, pulse clustering and features.

    Only the first valid entry of each side is analysed. A subject whose
    quality check fails, or whose sides all fail, comes back with
    ``vector=None``; stage failures are collected in ``notes`` rather than raised.
    """
    rec = resample_to_400hz(rec)
    fs = rec.sampling_rate
    res = SubjectResult(rec.subject_id, rec.group, rec.age, None, False)
    qr = quality_check(rec)
    if not qr.accepted:
        res.notes.append("QualityRejected: " + ",".join(qr.failed()))
        return res

    r_peaks = rr = hrv = None
    if rec.ecg is not None:
        try:
            r_peaks = detect_qrs(rec.ecg, fs)
            rr = rr_intervals(r_peaks, fs)
            hrv = hrv_features(rr)
        except PipelineError as exc:
            res.notes.append(f"ecg: {exc.one_line()}")
    else:
        res.notes.append("ecg: absent")

    onsets, sides = {}, {}
    for side in SIDES:
        sides[side] = None
        try:
            onsets[side] = detect_pulse_onsets(rec.cbfv(side), fs)
            entries = segment_entries(rec, {side: onsets[side]}, r_peaks)
            if not entries:
                res.notes.append(f"{side}: no entry with all beats in range")
                continue
            lm, dp = side_artifacts(entries[0])
        except PipelineError as exc:
            res.notes.append(f"{side}: {exc.one_line()}")
            continue
        sides[side] = (lm, dp)
        res.pulses[side] = dp
        res.landmarks[side] = lm
    res.beats = BeatAnnotations(pulse_onsets=onsets, r_peaks=r_peaks, rr_intervals=rr)

    try:
        res.vector = assemble_vector(manifest, sides, hrv, rec.bmi, rec.subject_id)
    except NoValidSide as exc:
        res.notes.append(exc.one_line())
        return res
    res.valid = validity_check(res.vector)
    if not res.valid:
        n_bad = int(np.count_nonzero(~res.vector.validity[: len(manifest)]))
        res.notes.append(f"{n_bad} invalid manifest slots")
    return res
