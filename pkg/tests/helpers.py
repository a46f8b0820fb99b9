"""Drive the command-line pipeline end to end inside a scratch directory."""

import hashlib
import json
from pathlib import Path

from vascage.cli import main

STAGES = ("synth", "extract", "rank", "train", "evaluate", "report")
KINDS = ("random_forest", "gbt", "kernel_ridge_rbf")


def run_pipeline(work: Path, config: dict, seed: int = 11, jobs: int = 1, extract_flags=()) -> dict[str, Path]:
    work = Path(work)
    work.mkdir(parents=True, exist_ok=True)
    cfg = work / "config.json"
    cfg.write_text(json.dumps(config))
    common = ["--config", str(cfg), "--seed", str(seed), "--jobs", str(jobs)]
    d = {s: work / s for s in STAGES}

    def run(*argv):
        code = main(list(argv))
        assert code == 0, argv
    run("synth", *common, "--out", str(d["synth"]))
    run("extract", *common, "--manifest", str(d["synth"] / "manifest.csv"), "--out", str(d["extract"]),
        *extract_flags)
    features = str(d["extract"] / "features.csv")
    run("rank", *common, "--features", features, "--out", str(d["rank"]))
    run("train", *common, "--features", features, "--out", str(d["train"]), *sum((["--model", k] for k in KINDS), []))
    for k in KINDS:
        run("evaluate", *common, "--model", str(d["train"] / f"model_{k}.json"), "--features", features,
            "--out", str(d["evaluate"]))
    run("report", *common, "--gaps", *[str(d["evaluate"] / f"gaps_{k}.csv") for k in KINDS],
        "--out", str(d["report"]))
    return d


def digest_dir(root: Path) -> dict[str, str]:
    root = Path(root)
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}
