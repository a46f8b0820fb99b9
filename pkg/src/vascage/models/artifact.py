"""Training entry point and the serializable model artifact."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .._io import write_atomic
from ..errors import ConfigError, FeatureMismatch, LoadError, TooFewSamples
from . import forest, gbt, kernel
from .tree import Tree
from .weights import normalize_weights

FORMAT_VERSION = 1
MIN_SAMPLES = 20
KINDS = ("random_forest", "gbt", "kernel_ridge_rbf")
LABELS = {
    "random_forest": "random forest (in-repo)",
    "gbt": "gradient-boosted trees (in-repo)",
    "kernel_ridge_rbf": "RBF kernel ridge (in-repo)",
}
_DEFAULTS = {"random_forest": forest.DEFAULTS, "gbt": gbt.DEFAULTS, "kernel_ridge_rbf": kernel.DEFAULTS}


def fingerprint(names: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()


@dataclass
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    w: np.ndarray | None = None
    feature_names: list[str] | None = None
    ids: list[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError(f"X {self.X.shape} and y {self.y.shape} do not agree")
        if self.w is not None:
            self.w = np.asarray(self.w, dtype=float)
            if self.w.shape != self.y.shape or np.any(self.w <= 0):
                raise ValueError("weights must be positive and match y")
        if self.feature_names is None:
            self.feature_names = [f"x{j}" for j in range(self.X.shape[1])]
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names length does not match X")


def resolve_hyperparams(kind: str, overrides: dict | None) -> dict:
    if kind not in KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    hp = dict(_DEFAULTS[kind])
    for k, v in (overrides or {}).items():
        if k not in hp:
            raise ConfigError(f"unknown hyperparameter {k!r} for {kind}")
        hp[k] = v
    return hp


@dataclass(frozen=True)
class ModelArtifact:
    kind: str
    hyperparams: dict
    seed: int
    feature_names: tuple[str, ...]
    fill_values: tuple[float, ...]
    state: dict = field(repr=False)
    train_ids: tuple[str, ...] = ()
    weighting: str = "none"
    provenance: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return LABELS[self.kind]

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.feature_names)

    def _trees(self, key="trees"):
        cache = self.state.setdefault("_cache", {})
        if key not in cache:
            cache[key] = [Tree.from_json(t) for t in self.state[key]]
        return cache[key]

    def impute(self, X: np.ndarray) -> np.ndarray:
        X = np.array(X, dtype=float)
        bad = ~np.isfinite(X)
        if bad.any():
            X[bad] = np.broadcast_to(np.asarray(self.fill_values), X.shape)[bad]
        return X

    def predict(self, X, feature_names: Sequence[str] | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if feature_names is not None and fingerprint(list(feature_names)) != self.fingerprint:
            raise FeatureMismatch("feature order fingerprint differs from the trained model")
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise FeatureMismatch(f"expected {len(self.feature_names)} columns, got shape {X.shape}")
        X = self.impute(X)
        if self.kind == "random_forest":
            return forest.predict_forest(self._trees(), X)
        if self.kind == "gbt":
            return gbt.predict_gbt(self.state["base"], self._trees(), self.hyperparams["learning_rate"], X)
        return kernel.predict_kernel_ridge(self.state, X)

    def to_json(self) -> dict:
        state = {k: v for k, v in self.state.items() if k != "_cache"}
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "label": self.label,
            "hyperparams": self.hyperparams,
            "seed": self.seed,
            "weighting": self.weighting,
            "feature_fingerprint": self.fingerprint,
            "feature_names": list(self.feature_names),
            "fill_values": list(self.fill_values),
            "train_ids": list(self.train_ids),
            "provenance": self.provenance,
            "state": state,
        }

    def dumps(self) -> str:
        # repr floats keep the state exact across a save/load cycle
        return json.dumps(self.to_json(), indent=1, allow_nan=False) + "\n"

    def save(self, path: str | Path) -> None:
        write_atomic(path, self.dumps())

    @classmethod
    def from_json(cls, d: dict) -> "ModelArtifact":
        if d.get("format_version") != FORMAT_VERSION:
            raise LoadError(f"unsupported model format {d.get('format_version')!r}")
        art = cls(kind=d["kind"], hyperparams=d["hyperparams"], seed=d["seed"],
                  feature_names=tuple(d["feature_names"]), fill_values=tuple(d["fill_values"]),
                  state=d["state"], train_ids=tuple(d["train_ids"]), weighting=d["weighting"],
                  provenance=d.get("provenance", {}))
        if art.fingerprint != d["feature_fingerprint"]:
            raise LoadError("stored fingerprint does not match stored feature names")
        return art

    @classmethod
    def load(cls, path: str | Path) -> "ModelArtifact":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise LoadError(f"cannot read model {path}: {exc}") from None
        return cls.from_json(d)


def column_fill_values(X: np.ndarray) -> np.ndarray:
    """Per-column median of the finite entries (0 for a column with none)."""
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j][np.isfinite(X[:, j])]
        if col.size:
            out[j] = float(np.median(col))
    return out


def train(kind: str, ts: TrainingSet, hyperparams: dict | None = None, seed: int = 0,
          jobs: int = 1, weighting: str | None = None, provenance: dict | None = None) -> ModelArtifact:
    hp = resolve_hyperparams(kind, hyperparams)
    n, p = ts.X.shape
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"{n} training samples, need at least {MIN_SAMPLES}")
    if p < 1:
        raise TooFewSamples("no feature columns")
    fill = column_fill_values(ts.X)
    X = np.where(np.isfinite(ts.X), ts.X, fill)
    w = normalize_weights(ts.w, n)
    y = ts.y
    if kind == "random_forest":
        state = {"trees": [t.to_json() for t in forest.fit_forest(X, y, w, seed, hp, jobs)]}
    elif kind == "gbt":
        base, trees, hist = gbt.fit_gbt(X, y, w, hp)
        state = {"base": base, "trees": [t.to_json() for t in trees], "loss_history": hist}
    else:
        state = kernel.fit_kernel_ridge(X, y, w, hp)
    return ModelArtifact(
        kind=kind, hyperparams=hp, seed=int(seed), feature_names=tuple(ts.feature_names),
        fill_values=tuple(float(v) for v in fill), state=state,
        train_ids=tuple(ts.ids or ()),
        # uniform weights are no weighting at all, so they get the same label
        weighting=weighting or ("none" if np.all(w == w[0]) else "custom"),
        provenance=dict(provenance or {}),
    )
