"""Per-subject 137-value feature vector: 128 morphology slots, BMI, 8 HRV."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoValidSide
from ..pulse import DominantPulse
from .hrv import HRV_NAMES, HrvFeatures
from .landmarks import LandmarkSet, eval_feature
from .manifest import FeatureManifest

BMI_INDEX = 128
MAX_INVALID_FRACTION = 0.05


def vector_names(manifest: FeatureManifest) -> list[str]:
    return manifest.names + ["BMI"] + list(HRV_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    subject_id: str
    values: np.ndarray
    validity: np.ndarray
    valid_sides: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.values) != len(self.validity):
            raise ValueError("values and validity differ in length")
        if np.any(self.validity & ~np.isfinite(self.values)):
            raise ValueError("a valid slot holds a non-finite value")


def evaluate_side(manifest: FeatureManifest, lm: LandmarkSet, dp: DominantPulse) -> np.ndarray:
    return np.array([eval_feature(spec, lm, dp) for spec in manifest], dtype=float)


def assemble_vector(
    manifest: FeatureManifest,
    sides: dict[str, tuple[LandmarkSet, DominantPulse] | None],
    hrv: HrvFeatures | None,
    bmi: float,
    subject_id: str = "",
) -> FeatureVector:
    """Average the morphology slots over valid sides and append BMI and HRV.

    A morphology slot is valid only if it is valid on every contributing side.
    """
    valid = sorted(k for k, v in sides.items() if v is not None)
    if not valid:
        raise NoValidSide(subject_id or "no side produced landmarks")
    per_side = np.stack([evaluate_side(manifest, *sides[k]) for k in valid])
    ok = np.isfinite(per_side).all(axis=0)
    morph = np.where(ok, per_side.mean(axis=0) if len(valid) > 1 else per_side[0], np.nan)

    if hrv is None:
        hrv_vals = np.full(len(HRV_NAMES), np.nan)
    else:
        hrv_vals = np.array(hrv.values(), dtype=float)
    values = np.concatenate([morph, [float(bmi)], hrv_vals])
    validity = np.isfinite(values)
    values = np.where(validity, values, np.nan)
    return FeatureVector(subject_id=subject_id, values=values, validity=validity,
                         valid_sides=tuple(valid))


def validity_check(fv: FeatureVector, n_manifest: int = BMI_INDEX) -> bool:
    """Landmarks found on at least one side and at most 5% of morphology slots invalid."""
    if not fv.valid_sides:
        return False
    invalid = int(np.count_nonzero(~fv.validity[:n_manifest]))
    return invalid <= MAX_INVALID_FRACTION * n_manifest
