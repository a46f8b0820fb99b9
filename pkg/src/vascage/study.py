"""Feature tables and the train/evaluate loop shared by the CLI and in-memory studies."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import csv_text, write_atomic
from .analytics import CohortSplit, GapRecord, Report, build_report, split_healthy
from .errors import LoadError
from .features import FeatureManifest, build_default_manifest, vector_names
from .features.manifest import manifest_from_names
from .models import ModelArtifact, TrainingSet, balanced_weights, train
from .pipeline import SubjectResult, extract_subject
from .synth import CohortConfig, subject_specs, synth_recording

SUBJECTS_FILE = "subjects.csv"


@dataclass
class FeatureTable:
    """Feature matrix plus the per-subject metadata needed to split and score it."""

    ids: list[str]
    groups: list[str]
    ages: np.ndarray
    X: np.ndarray
    names: list[str]

    def rows(self, ids: Sequence[str]) -> np.ndarray:
        pos = {s: i for i, s in enumerate(self.ids)}
        return np.array([pos[s] for s in ids], dtype=np.int64)

    def subjects(self) -> list[tuple[str, str, float]]:
        return [(s, g, float(a)) for s, g, a in zip(self.ids, self.groups, self.ages)]


def table_from_results(results: Sequence[SubjectResult], names: list[str]) -> FeatureTable:
    """Valid subjects only, ordered by subject_id."""
    keep = sorted((r for r in results if r.valid), key=lambda r: r.subject_id)
    X = np.array([r.vector.values for r in keep], dtype=float).reshape(len(keep), len(names))
    return FeatureTable([r.subject_id for r in keep], [r.group for r in keep],
                        np.array([r.age for r in keep], dtype=float), X, names)


def write_feature_table(table: FeatureTable, path: str | Path) -> None:
    """``path`` gets the feature matrix; a ``subjects.csv`` beside it gets group and age."""
    path = Path(path)
    rows = [[sid] + list(x) for sid, x in zip(table.ids, table.X)]
    write_atomic(path, csv_text(["subject_id"] + table.names, rows, decimals=9))
    meta = [[s, g, a] for s, g, a in zip(table.ids, table.groups, table.ages)]
    write_atomic(path.parent / SUBJECTS_FILE, csv_text(["subject_id", "group", "age"], meta))


def read_feature_table(path: str | Path) -> FeatureTable:
    path = Path(path)
    meta_path = path.parent / SUBJECTS_FILE
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        with open(meta_path, newline="", encoding="utf-8") as fh:
            meta = {r["subject_id"]: r for r in csv.DictReader(fh)}
    except OSError as exc:
        raise LoadError(f"cannot read feature table: {exc}") from None
    if not rows or rows[0][0] != "subject_id":
        raise LoadError(f"{path}: header must start with subject_id")
    names = rows[0][1:]
    ids, X = [], []
    for k, r in enumerate(rows[1:], start=2):
        if len(r) != len(names) + 1:
            raise LoadError(f"{path}: row {k} has {len(r)} fields, expected {len(names) + 1}")
        if r[0] not in meta:
            raise LoadError(f"{path}: subject {r[0]} missing from {SUBJECTS_FILE}")
        ids.append(r[0])
        try:
            X.append([float(v) for v in r[1:]])
        except ValueError as exc:
            raise LoadError(f"{path}: row {k}: {exc}") from None
    return FeatureTable(ids, [meta[s]["group"] for s in ids],
                        np.array([float(meta[s]["age"]) for s in ids]),
                        np.array(X, dtype=float).reshape(len(ids), len(names)), names)


def training_set(table: FeatureTable, split: CohortSplit, weighting: str = "balanced") -> TrainingSet:
    rows = table.rows(split.train)
    y = table.ages[rows]
    w = balanced_weights(y) if weighting == "balanced" else None
    return TrainingSet(table.X[rows], y, w, list(table.names), list(split.train))


def gap_records(model: ModelArtifact, table: FeatureTable) -> list[GapRecord]:
    pred = model.predict(table.X, table.names)
    return [GapRecord(s, g, float(a), float(p))
            for s, g, a, p in zip(table.ids, table.groups, table.ages, pred)]


def _synth_extract(arg) -> SubjectResult:
    spec, cfg_dict, manifest_names = arg
    cfg = CohortConfig.from_dict(cfg_dict)
    manifest = manifest_from_names(manifest_names)
    rec, _ = synth_recording(spec, cfg.duration_s, cfg.fs, cfg.with_ecg)
    return extract_subject(rec, manifest)


def synth_and_extract(cfg: CohortConfig, master_seed: int, manifest: FeatureManifest | None = None,
                      jobs: int = 1) -> list[SubjectResult]:
    """Generate the cohort in memory and extract every subject (no files written)."""
    manifest = manifest or build_default_manifest()
    tasks = [(s, cfg.to_dict(), manifest.names) for s in subject_specs(cfg, master_seed)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_synth_extract, tasks, chunksize=4))
    return [_synth_extract(t) for t in tasks]


def run_study(table: FeatureTable, kinds: Sequence[str], split_seed: int, model_seed: int,
              hyperparams: dict | None = None, age_min: float = 50.0, train_fraction: float = 0.75,
              weighting: str = "balanced", config: dict | None = None, jobs: int = 1
              ) -> tuple[Report, dict[str, ModelArtifact]]:
    split = split_healthy(table.subjects(), split_seed, age_min, train_fraction)
    ts = training_set(table, split, weighting)
    models, records = {}, {}
    for kind in kinds:
        m = train(kind, ts, (hyperparams or {}).get(kind), model_seed, jobs=jobs, weighting=weighting)
        models[kind] = m
        records[kind] = gap_records(m, table)
    return build_report(records, split, config), models


def default_names(manifest: FeatureManifest | None = None) -> list[str]:
    return vector_names(manifest or build_default_manifest())
