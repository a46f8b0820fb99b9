from .grammar import FeatureSpec, parse_feature_name, serialize
from .hrv import HRV_NAMES, HrvFeatures, hrv_features
from .landmarks import Landmark, LandmarkSet, detect_landmarks, eval_feature
from .manifest import (
    MANIFEST_SIZE,
    TOP10_NAMES,
    FeatureManifest,
    build_default_manifest,
    load_manifest,
    write_manifest,
)
from .vector import FeatureVector, assemble_vector, validity_check, vector_names

__all__ = [
    "FeatureSpec", "parse_feature_name", "serialize",
    "HRV_NAMES", "HrvFeatures", "hrv_features",
    "Landmark", "LandmarkSet", "detect_landmarks", "eval_feature",
    "MANIFEST_SIZE", "TOP10_NAMES", "FeatureManifest", "build_default_manifest",
    "load_manifest", "write_manifest",
    "FeatureVector", "assemble_vector", "validity_check", "vector_names",
]
