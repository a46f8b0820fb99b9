"""Run configuration loaded from JSON; unknown keys are rejected."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, LoadError
from .models import KINDS, resolve_hyperparams
from .synth import CohortConfig

SEED_KEYS = ("master", "split", "model")


@dataclass
class RunConfig:
    cohort_manifest: str | None = None
    out_dir: str | None = None
    seeds: dict = field(default_factory=dict)
    models: list = field(default_factory=lambda: list(KINDS))
    hyperparams: dict = field(default_factory=dict)
    age_min: float = 50.0
    train_fraction: float = 0.75
    top_k: int = 10
    weighting: str = "balanced"
    dump_beats: bool = False
    dump_pulses: bool = False
    cohort: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__) - {"raw"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**d, raw=json.loads(json.dumps(d)))
        bad = sorted(set(cfg.seeds) - set(SEED_KEYS))
        if bad:
            raise ConfigError(f"unknown seed keys: {bad}")
        for k, v in cfg.seeds.items():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"seed {k!r} must be a non-negative integer")
        for kind in cfg.models:
            if kind not in KINDS:
                raise ConfigError(f"unknown model kind {kind!r}")
        for kind, hp in cfg.hyperparams.items():
            resolve_hyperparams(kind, hp)
        if not 0 < cfg.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if cfg.weighting not in ("balanced", "none"):
            raise ConfigError("weighting must be 'balanced' or 'none'")
        if not isinstance(cfg.top_k, int) or cfg.top_k < 1:
            raise ConfigError("top_k must be a positive integer")
        cfg.cohort_config()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise LoadError(f"cannot read config {path}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(d)

    def cohort_config(self) -> CohortConfig:
        return CohortConfig.from_dict(self.cohort) if self.cohort else CohortConfig.default()

    def seed(self, which: str, cli_seed: int | None) -> int | None:
        """A seed named in the config wins; otherwise the ``--seed`` value."""
        return self.seeds.get(which, cli_seed)
