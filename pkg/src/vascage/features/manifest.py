"""The ordered 128-slot morphological feature catalog."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterator, Sequence

from .._io import write_atomic
from .grammar import LANDMARKS, LT, MAC, FeatureSpec, latency, parse_feature_name, ratio, serialize

MANIFEST_SIZE = 128

TOP10_NAMES = (
    "RLp1v2Lp1p2", "RLTLp1p3", "RLTLv1p2", "RLTLp1p2", "RLTLv1p3",
    "Lv1p3", "LT", "RLTLp2p3", "RLTLv2p2", "RLv1p1Lv1p3",
)


@dataclass(frozen=True)
class FeatureManifest:
    specs: tuple[FeatureSpec, ...]

    def __post_init__(self):
        names = self.names
        if len(names) != MANIFEST_SIZE:
            raise ValueError(f"manifest has {len(names)} entries, expected {MANIFEST_SIZE}")
        if len(set(names)) != len(names):
            raise ValueError("manifest names are not unique")

    @property
    def names(self) -> list[str]:
        return [serialize(s) for s in self.specs]

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[FeatureSpec]:
        return iter(self.specs)

    def __getitem__(self, i: int) -> FeatureSpec:
        return self.specs[i]

    def text(self) -> str:
        return "".join(n + "\n" for n in self.names)


def canonical_delays() -> list[FeatureSpec]:
    """LT first, then the 15 landmark latencies in temporal pair order."""
    return [LT] + [latency(a, b) for a, b in combinations(LANDMARKS, 2)]


def _endpoints(d: FeatureSpec) -> set[str]:
    return set(d.operands) if d.kind == "latency" else set()


def ratio_pool() -> list[FeatureSpec]:
    delays = canonical_delays()
    pool = []
    for num in delays:
        for den in delays:
            if num == den:
                continue
            involves_lt = num.kind == "lt" or den.kind == "lt"
            if involves_lt or _endpoints(num) & _endpoints(den):
                pool.append(ratio(num, den))
    return pool


def build_default_manifest() -> FeatureManifest:
    candidates: list[FeatureSpec] = [parse_feature_name(n) for n in TOP10_NAMES]
    candidates += [FeatureSpec("amplitude", (lm,)) for lm in LANDMARKS]
    candidates += [FeatureSpec("curvature", (lm,)) for lm in LANDMARKS]
    candidates += [MAC]
    candidates += [FeatureSpec("slope", (k,)) for k in (1, 2, 3)]
    candidates += canonical_delays()[1:]
    candidates += ratio_pool()

    seen: set[str] = set()
    specs = []
    for spec in candidates:
        name = serialize(spec)
        if name in seen:
            continue
        seen.add(name)
        specs.append(spec)
        if len(specs) == MANIFEST_SIZE:
            break
    return FeatureManifest(tuple(specs))


def manifest_from_names(names: Sequence[str]) -> FeatureManifest:
    return FeatureManifest(tuple(parse_feature_name(n) for n in names))


def load_manifest(path: str | Path) -> FeatureManifest:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return manifest_from_names([ln for ln in lines if ln])


def write_manifest(manifest: FeatureManifest, path: str | Path) -> None:
    write_atomic(path, manifest.text())
