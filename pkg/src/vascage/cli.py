"""Command-line entry point: ``vascage <command> [options]``.

Typical run::

    vascage synth    --seed 7 --out cohort
    vascage extract  --manifest cohort/manifest.csv --out work
    vascage rank     --features work/features.csv --out work
    vascage train    --seed 7 --features work/features.csv --out work
    vascage evaluate --model work/model_gbt.json --features work/features.csv --out work
    vascage report   --gaps work/gaps_*.csv --out report

Errors print one ``Code: message`` line on stderr; exit status is 2 for bad
input and 3 when a pipeline stage could not produce its output.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ._io import csv_text, dumps_fixed, write_atomic
from .analytics import HEALTHY, CohortSplit, GapRecord, build_report, split_healthy, write_report
from .config import RunConfig
from .errors import ConfigError, LoadError, MissingSeed, VascageError
from .features import build_default_manifest, load_manifest, vector_names, write_manifest
from .features.manifest import FeatureManifest, manifest_from_names
from .ingest import load_recording, read_cohort_manifest
from .models import KINDS, ModelArtifact, train
from .models.artifact import column_fill_values
from .pipeline import SubjectResult, extract_subject
from .pulse import GRID
from .ranking import rank_features
from .study import gap_records, read_feature_table, table_from_results, training_set, write_feature_table
from .synth import synth_cohort


def _require_seed(cfg: RunConfig, which: str, cli_seed: int | None) -> int:
    seed = cfg.seed(which, cli_seed)
    if seed is None:
        raise MissingSeed(f"no --seed given and config has no seeds.{which}")
    return seed


def _out_dir(args, cfg: RunConfig) -> Path:
    out = args.out or cfg.out_dir
    if out is None:
        raise ConfigError("no --out given and config has no out_dir")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _feature_manifest(path: str | None) -> FeatureManifest:
    return load_manifest(path) if path else build_default_manifest()


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args, cfg: RunConfig) -> int:
    seed = _require_seed(cfg, "master", args.seed)
    out = synth_cohort(cfg.cohort_config(), _out_dir(args, cfg), seed, args.jobs)
    print(out / "manifest.csv")
    return 0


def _extract_one(arg) -> SubjectResult:
    sid, path, names = arg
    rec = load_recording(path)
    if rec.subject_id != sid:
        raise LoadError(f"{path}: sidecar subject_id {rec.subject_id!r} differs from manifest {sid!r}")
    return extract_subject(rec, manifest_from_names(names))


def cmd_extract(args, cfg: RunConfig) -> int:
    manifest_path = args.manifest or cfg.cohort_manifest
    if manifest_path is None:
        raise ConfigError("no --manifest given and config has no cohort_manifest")
    rows = read_cohort_manifest(manifest_path)
    fm = _feature_manifest(args.feature_manifest)
    out = _out_dir(args, cfg)
    tasks = [(sid, p, fm.names) for sid, p in rows]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=4))
    else:
        results = [_extract_one(t) for t in tasks]

    names = vector_names(fm)
    table = table_from_results(results, names)
    write_feature_table(table, out / "features.csv")
    write_atomic(out / "validity.csv", csv_text(
        ["subject_id", "group", "status", "invalid_slots", "notes"],
        [[r.subject_id, r.group, r.status,
          "" if r.vector is None else int(np.count_nonzero(~r.vector.validity[: len(fm)])),
          "; ".join(r.notes)] for r in results]))

    if args.dump_beats or cfg.dump_beats:
        for r in results:
            if r.beats is not None:
                write_atomic(out / "beats" / f"{r.subject_id}.json", dumps_fixed(r.beats.to_json()) + "\n")
    if args.dump_pulses or cfg.dump_pulses:
        for r in results:
            for side, dp in sorted(r.pulses.items()):
                dt = dp.mean_beat_duration / GRID
                rows = [[i, i * dt, v] for i, v in enumerate(dp.samples)]
                write_atomic(out / "pulses" / f"{r.subject_id}_{side}.csv",
                             csv_text(["grid_index", "time_s", "cbfv"], rows))
    n_valid = sum(r.valid for r in results)
    print(f"{n_valid}/{len(results)} subjects valid -> {out / 'features.csv'}")
    return 0


def cmd_rank(args, cfg: RunConfig) -> int:
    table = read_feature_table(args.features)
    K = args.top_k or cfg.top_k
    X = np.where(np.isfinite(table.X), table.X, column_fill_values(table.X))
    result, M, groups = rank_features(X, table.groups, table.names, K)
    out = _out_dir(args, cfg)
    top = set(result.top_indices.tolist())
    const = set(result.constant_features)
    write_atomic(out / "ranking.csv", csv_text(
        ["rank", "feature", "V", "constant", "top_k"],
        [[i + 1, table.names[j], result.V[j], int(table.names[j] in const), int(j in top)]
         for i, j in enumerate(result.order)]))
    write_atomic(out / "group_means.csv", csv_text(
        ["group"] + table.names, [[g] + list(M[i]) for i, g in enumerate(groups)]))
    write_atomic(out / "ranking.json", dumps_fixed({
        "top_k": result.top_k, "K": K, "groups": list(groups),
        "constant_features": result.constant_features,
        "n_subjects": len(table.ids)}) + "\n")
    print(",".join(result.top_k))
    return 0


def cmd_train(args, cfg: RunConfig) -> int:
    split_seed = _require_seed(cfg, "split", args.seed)
    model_seed = _require_seed(cfg, "model", args.seed)
    table = read_feature_table(args.features)
    split = split_healthy(table.subjects(), split_seed, cfg.age_min, cfg.train_fraction)
    ts = training_set(table, split, cfg.weighting)
    out = _out_dir(args, cfg)
    provenance = {"split_seed": split_seed, "age_min": cfg.age_min,
                  "train_fraction": cfg.train_fraction, "test_ids": list(split.test)}
    for kind in args.model or cfg.models:
        m = train(kind, ts, cfg.hyperparams.get(kind), model_seed, jobs=args.jobs,
                  weighting=cfg.weighting, provenance=provenance)
        m.save(out / f"model_{kind}.json")
        print(out / f"model_{kind}.json")
    return 0


def cmd_evaluate(args, cfg: RunConfig) -> int:
    model = ModelArtifact.load(args.model)
    table = read_feature_table(args.features)
    train_ids = set(model.train_ids)
    test_ids = set(model.provenance.get("test_ids", ()))

    def split_of(r: GapRecord) -> str:
        if r.group != HEALTHY:
            return "-"
        return "train" if r.subject_id in train_ids else "test" if r.subject_id in test_ids else "ineligible"

    recs = gap_records(model, table)
    out = _out_dir(args, cfg)
    path = out / f"gaps_{model.kind}.csv"
    write_atomic(path, csv_text(
        ["model", "subject_id", "group", "split", "age", "predicted", "gap"],
        [[model.kind, r.subject_id, r.group, split_of(r), r.age, r.predicted, r.gap] for r in recs],
        decimals=9))
    print(path)
    return 0


def _read_gaps(path: str) -> tuple[str, list[GapRecord], dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise LoadError(f"{path}: no rows")
    kinds = {r["model"] for r in rows}
    if len(kinds) != 1:
        raise LoadError(f"{path}: expected one model per file, found {sorted(kinds)}")
    recs = [GapRecord(r["subject_id"], r["group"], float(r["age"]), float(r["predicted"])) for r in rows]
    return kinds.pop(), recs, {r["subject_id"]: r["split"] for r in rows}


def cmd_report(args, cfg: RunConfig) -> int:
    records, split_map = {}, None
    for path in sorted(args.gaps):
        kind, recs, splits = _read_gaps(path)
        if kind in records:
            raise LoadError(f"model {kind} appears in more than one gaps file")
        if split_map is not None and splits != split_map:
            raise LoadError(f"{path}: train/test assignment differs from the other gaps files")
        records[kind], split_map = recs, splits
    split = CohortSplit(
        train=tuple(sorted(s for s, v in split_map.items() if v == "train")),
        test=tuple(sorted(s for s, v in split_map.items() if v == "test")),
        age_min=cfg.age_min, train_fraction=cfg.train_fraction, seed=cfg.seed("split", args.seed),
    )
    report = build_report(records, split, config=cfg.raw)
    out = _out_dir(args, cfg)
    write_report(report, out)
    print(out / "report.json")
    return 0


def cmd_manifest(args, cfg: RunConfig) -> int:
    fm = build_default_manifest()
    if args.out:
        path = Path(args.out)
        if path.is_dir() or args.out.endswith(("/", "\\")):
            path = path / "features_manifest.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_manifest(fm, path)
        print(path)
    else:
        sys.stdout.write(fm.text())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--seed", type=int, help="seed for every random stage (config seeds take precedence)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")

    p = argparse.ArgumentParser(prog="vascage", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic cohort")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("extract", parents=[common], help="recordings -> feature matrix")
    s.add_argument("--manifest", help="cohort manifest CSV (subject_id,path)")
    s.add_argument("--feature-manifest", help="feature manifest file (default: built-in 128 slots)")
    s.add_argument("--dump-beats", action="store_true", help="write per-subject beat annotations")
    s.add_argument("--dump-pulses", action="store_true", help="write per-subject dominant pulses")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("rank", parents=[common], help="rank features by group-mean variance")
    s.add_argument("--features", required=True)
    s.add_argument("--top-k", type=int)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("train", parents=[common], help="fit age models on the healthy training split")
    s.add_argument("--features", required=True)
    s.add_argument("--model", action="append", choices=KINDS, help="model kind (repeatable)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", parents=[common], help="predict ages and gaps for every subject")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("report", parents=[common], help="MAE tables and gap statistics")
    s.add_argument("--gaps", nargs="+", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("manifest", parents=[common], help="feature manifest utilities")
    s.add_argument("--emit", action="store_true", required=True, help="write the default manifest")
    s.set_defaults(func=cmd_manifest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = RunConfig.load(args.config)
        return args.func(args, cfg)
    except VascageError as exc:
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"LoadError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
