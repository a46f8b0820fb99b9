"""Healthy train/test split, MAE tables, age-gap statistics and the report bundle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import csv_text, dumps_fixed, write_atomic
from .errors import EmptyGroup, TooFewEligible
from .ingest import GROUPS

HEALTHY = "healthy"
MIN_ELIGIBLE = 8


@dataclass(frozen=True)
class CohortSplit:
    train: tuple[str, ...]
    test: tuple[str, ...]
    age_min: float
    train_fraction: float
    seed: int


@dataclass(frozen=True)
class GapRecord:
    subject_id: str
    group: str
    age: float
    predicted: float

    @property
    def gap(self) -> float:
        return self.predicted - self.age


def age_bin(age: float, width: float = 5.0) -> int:
    return int(math.floor(age / width))


def split_healthy(subjects: Iterable[tuple[str, str, float]], seed: int, age_min: float = 50.0,
                  train_fraction: float = 0.75, bin_width: float = 5.0) -> CohortSplit:
    """Stratified split of healthy subjects strictly older than ``age_min``.

    ``subjects`` yields ``(subject_id, group, age)``. Eligible ids are sorted,
    bucketed by age bin, shuffled per bin with one generator seeded by
    ``seed`` (bins visited in ascending order) and the first
    ``floor(train_fraction * n_bin)`` of each bin go to training.
    """
    eligible = sorted((sid, age) for sid, grp, age in subjects if grp == HEALTHY and age > age_min)
    if len(eligible) < MIN_ELIGIBLE:
        raise TooFewEligible(f"{len(eligible)} healthy subjects older than {age_min}, need {MIN_ELIGIBLE}")
    bins: dict[int, list[str]] = {}
    for sid, age in eligible:
        bins.setdefault(age_bin(age, bin_width), []).append(sid)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for b in sorted(bins):
        ids = bins[b]
        perm = rng.permutation(len(ids))
        k = int(math.floor(train_fraction * len(ids)))
        train += [ids[i] for i in perm[:k]]
        test += [ids[i] for i in perm[k:]]
    return CohortSplit(tuple(sorted(train)), tuple(sorted(test)), age_min, train_fraction, seed)


def mae(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("mae needs two equal-length non-empty arrays")
    return float(np.mean(np.abs(pred - truth)))


def mae_table(records: Mapping[str, Sequence[GapRecord]], test_ids: Iterable[str],
              groups: Sequence[str] = GROUPS) -> dict[str, dict[str, float]]:
    """Per model: MAE on the healthy test split, on all healthy subjects, and per diseased group present."""
    test = set(test_ids)
    out = {}
    for model, recs in records.items():
        row = {}
        ht = [r for r in recs if r.group == HEALTHY and r.subject_id in test]
        ha = [r for r in recs if r.group == HEALTHY]
        row["healthy_test"] = _mae(ht)
        row["healthy_all"] = _mae(ha)
        for g in groups:
            rg = [r for r in recs if r.group == g]
            if g != HEALTHY and rg:
                row[g] = _mae(rg)
        out[model] = row
    return out


def _mae(recs: Sequence[GapRecord]) -> float:
    if not recs:
        return float("nan")
    return mae([r.predicted for r in recs], [r.age for r in recs])


def mae_difference_table(table: Mapping[str, Mapping[str, float]],
                         reference: str = "healthy_test") -> dict[str, dict[str, float]]:
    """Each diseased group's MAE minus the model's healthy-test MAE."""
    return {
        model: {g: v - row[reference] for g, v in row.items() if not g.startswith(HEALTHY)}
        for model, row in table.items()
    }


def gap_stats(gaps) -> dict[str, float]:
    """Share of strictly positive gaps plus mean and N-1 STD over all gaps."""
    g = np.asarray(gaps, dtype=float)
    if g.size == 0:
        raise EmptyGroup("no gaps")
    return {
        "n": int(g.size),
        "proportion_positive": float(np.count_nonzero(g > 0) / g.size),
        "mean_gap": float(g.mean()),
        "std_gap": float(g.std(ddof=1)) if g.size > 1 else 0.0,
    }


def gap_age_distribution(records: Sequence[GapRecord], bin_width: float = 5.0) -> dict[int, dict[str, int]]:
    """Keyed by bin lower edge: counts of positive (gap > 0) and non-positive gaps."""
    out: dict[int, dict[str, int]] = {}
    for r in records:
        lo = int(age_bin(r.age, bin_width) * bin_width)
        cell = out.setdefault(lo, {"positive": 0, "negative": 0})
        cell["positive" if r.gap > 0 else "negative"] += 1
    return dict(sorted(out.items()))


def evaluation_records(records: Sequence[GapRecord], split: CohortSplit) -> list[GapRecord]:
    """Healthy test-split subjects plus every diseased subject."""
    test = set(split.test)
    return [r for r in records if r.group != HEALTHY or r.subject_id in test]


@dataclass
class Report:
    mae: dict
    mae_diff: dict
    gap_stats: dict
    gap_bins: dict
    records: dict
    split: CohortSplit
    config: dict

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "split": {"seed": self.split.seed, "age_min": self.split.age_min,
                      "train_fraction": self.split.train_fraction,
                      "n_train": len(self.split.train), "n_test": len(self.split.test)},
            "models": sorted(self.records),
            "mae_table": self.mae,
            "mae_diff": self.mae_diff,
            "gap_stats": self.gap_stats,
            "gap_bins": {m: {g: {str(k): v for k, v in bins.items()} for g, bins in per.items()}
                         for m, per in self.gap_bins.items()},
        }


def build_report(records: Mapping[str, Sequence[GapRecord]], split: CohortSplit,
                 config: dict | None = None, groups: Sequence[str] = GROUPS) -> Report:
    """Tables over the evaluation set: healthy test subjects and all diseased subjects."""
    records = {m: sorted(r, key=lambda x: x.subject_id) for m, r in sorted(records.items())}
    table = mae_table(records, split.test, groups)
    stats, bins = {}, {}
    for m, recs in records.items():
        ev = evaluation_records(recs, split)
        stats[m], bins[m] = {}, {}
        for g in groups:
            rg = [r for r in ev if r.group == g]
            if rg:
                stats[m][g] = gap_stats([r.gap for r in rg])
                bins[m][g] = gap_age_distribution(rg)
    return Report(table, mae_difference_table(table), stats, bins, records, split, dict(config or {}))


def _mean_row(table: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    cols = next(iter(table.values())).keys()
    return {c: float(np.mean([row[c] for row in table.values()])) for c in cols}


def _table_csv(table: Mapping[str, Mapping[str, float]], with_mean: bool = True) -> str:
    cols = list(next(iter(table.values())).keys())
    rows = [[m] + [row[c] for c in cols] for m, row in table.items()]
    if with_mean and len(table) > 1:
        mean = _mean_row(table)
        rows.append(["mean"] + [mean[c] for c in cols])
    return csv_text(["model"] + cols, rows)


def write_report(report: Report, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    split_of = {**{s: "train" for s in report.split.train}, **{s: "test" for s in report.split.test}}
    files = {
        "report.json": dumps_fixed(report.to_json()) + "\n",
        "mae_table.csv": _table_csv(report.mae),
        "mae_diff.csv": _table_csv(report.mae_diff),
        "gap_stats.csv": csv_text(
            ["model", "group", "n", "proportion_positive", "mean_gap", "std_gap"],
            [[m, g, s["n"], s["proportion_positive"], s["mean_gap"], s["std_gap"]]
             for m, per in report.gap_stats.items() for g, s in per.items()]),
        "gap_bins.csv": csv_text(
            ["model", "group", "age_bin_start", "positive", "negative"],
            [[m, g, lo, c["positive"], c["negative"]]
             for m, per in report.gap_bins.items() for g, bins in per.items() for lo, c in bins.items()]),
        "gaps.csv": csv_text(
            ["model", "subject_id", "group", "split", "age", "predicted", "gap"],
            [[m, r.subject_id, r.group, split_of.get(r.subject_id, "ineligible") if r.group == HEALTHY else "-",
              r.age, r.predicted, r.gap]
             for m, recs in report.records.items() for r in recs]),
    }
    paths = []
    for name, text in files.items():
        write_atomic(out / name, text)
        paths.append(out / name)
    return paths
