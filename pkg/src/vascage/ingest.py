"""Loading, resampling, quality screening and 360-beat segmentation of recordings."""

from __future__ import annotations

import csv
import gzip
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyManifest, FewerThan360Beats, LoadError, MissingMetadata
from ._io import write_atomic

TARGET_FS = 400.0
BEATS_PER_ENTRY = 360
MIN_BEAT_S = 0.3
MAX_BEAT_S = 2.0

GROUPS = ("healthy", "AD", "MCI", "acute_stroke", "post_stroke", "established")
SIDES = ("left", "right")
REQUIRED_META = ("subject_id", "age", "group", "bmi", "sampling_rate_hz")


@dataclass(frozen=True)
class QualityConfig:
    min_beats: int = BEATS_PER_ENTRY
    min_beat_s: float = MIN_BEAT_S
    max_flat_run_s: float = 1.0
    max_clip_fraction: float = 0.005
    noise_cutoff_hz: float = 20.0
    max_noise_fraction: float = 0.5


@dataclass(eq=False)
class Recording:
    subject_id: str
    group: str
    age: float
    bmi: float
    sampling_rate: float
    cbfv_left: np.ndarray
    cbfv_right: np.ndarray
    ecg: np.ndarray | None = None

    def __post_init__(self):
        self.cbfv_left = np.asarray(self.cbfv_left, dtype=float)
        self.cbfv_right = np.asarray(self.cbfv_right, dtype=float)
        if self.ecg is not None:
            self.ecg = np.asarray(self.ecg, dtype=float)
        if not self.sampling_rate > 0:
            raise LoadError(f"sampling_rate must be positive, got {self.sampling_rate}")
        if not 0 < self.age < 130:
            raise LoadError(f"age {self.age} outside (0, 130)")
        if not self.bmi > 0:
            raise LoadError(f"bmi must be positive, got {self.bmi}")
        if self.group not in GROUPS:
            raise LoadError(f"unknown group {self.group!r}")
        n = len(self.cbfv_left)
        for name, arr in self.channels().items():
            if arr.ndim != 1 or len(arr) != n:
                raise LoadError(f"channel {name} has length {len(arr)}, expected {n}")

    def channels(self) -> dict[str, np.ndarray]:
        ch = {"cbfv_left": self.cbfv_left, "cbfv_right": self.cbfv_right}
        if self.ecg is not None:
            ch["ecg"] = self.ecg
        return ch

    def cbfv(self, side: str) -> np.ndarray:
        return self.cbfv_left if side == "left" else self.cbfv_right

    @property
    def n_samples(self) -> int:
        return len(self.cbfv_left)

    @property
    def duration(self) -> float:
        return self.n_samples / self.sampling_rate

    def meta(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "age": self.age,
            "group": self.group,
            "bmi": self.bmi,
            "sampling_rate_hz": self.sampling_rate,
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Recording):
            return NotImplemented
        if self.meta() != other.meta():
            return False
        a, b = self.channels(), other.channels()
        return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)


@dataclass(frozen=True)
class EntrySegment:
    subject_id: str
    side: str
    samples: np.ndarray
    beat_onsets: np.ndarray
    qrs_peaks: np.ndarray | None = None
    fs: float = TARGET_FS

    @property
    def n_beats(self) -> int:
        return len(self.beat_onsets) - 1


@dataclass(frozen=True)
class QualityReport:
    subject_id: str
    flags: Mapping[str, Mapping[str, bool]]
    required: tuple[str, ...] = ("cbfv_left", "cbfv_right")

    @property
    def accepted(self) -> bool:
        return not any(any(self.flags[ch].values()) for ch in self.required if ch in self.flags)

    def failed(self) -> list[str]:
        return [f"{ch}:{name}" for ch in self.required if ch in self.flags
                for name, v in self.flags[ch].items() if v]


# ---------------------------------------------------------------------------
# file I/O


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    name = path.name
    for suffix in (".csv.gz", ".csv"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return path.with_name(name + ".meta.json")


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def _scan_rows(path: Path, ncols: int) -> np.ndarray:
    """Slow row-by-row parse used to name the first offending file line."""
    rows = []
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        next(reader)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != ncols:
                raise LoadError(f"line {lineno}: expected {ncols} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise LoadError(f"line {lineno}: unparseable value in {row!r}") from None
    return np.array(rows, dtype=float).reshape(-1, ncols)


def load_recording(path: str | Path) -> Recording:
    """Read a ``t,cbfv_left,cbfv_right[,ecg]`` CSV plus its ``.meta.json`` sidecar."""
    path = Path(path)
    meta_path = sidecar_path(path)
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise LoadError(f"sidecar {meta_path} not found") from None
    for key in REQUIRED_META:
        if key not in meta:
            raise MissingMetadata(key)

    try:
        with _open_text(path) as fh:
            header = fh.readline().strip().split(",")
    except FileNotFoundError:
        raise LoadError(f"recording {path} not found") from None
    if header[:3] != ["t", "cbfv_left", "cbfv_right"] or header[3:] not in ([], ["ecg"]):
        raise LoadError(f"unexpected header {','.join(header)}")
    ncols = len(header)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=float)
        if data.shape[1] != ncols:
            raise ValueError
    except ValueError:
        data = _scan_rows(path, ncols)
    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        raise LoadError(f"line {int(np.argmax(bad)) + 2}: non-finite sample")

    return Recording(
        subject_id=str(meta["subject_id"]),
        group=str(meta["group"]),
        age=float(meta["age"]),
        bmi=float(meta["bmi"]),
        sampling_rate=float(meta["sampling_rate_hz"]),
        cbfv_left=data[:, 1],
        cbfv_right=data[:, 2],
        ecg=data[:, 3] if ncols == 4 else None,
    )


def write_recording(rec: Recording, path: str | Path, decimals: int = 4) -> None:
    """Write ``rec`` as CSV + sidecar. Values are printed with ``decimals`` places."""
    path = Path(path)
    cols = [np.arange(rec.n_samples) / rec.sampling_rate, rec.cbfv_left, rec.cbfv_right]
    header = "t,cbfv_left,cbfv_right"
    if rec.ecg is not None:
        cols.append(rec.ecg)
        header += ",ecg"
    import io

    buf = io.StringIO()
    buf.write(header + "\n")
    fmt = ["%.6f"] + [f"%.{decimals}f"] * (len(cols) - 1)
    np.savetxt(buf, np.column_stack(cols), fmt=fmt, delimiter=",")
    text = buf.getvalue()
    if path.suffix == ".gz":
        write_atomic(path, gzip.compress(text.encode(), mtime=0))
    else:
        write_atomic(path, text)
    write_atomic(sidecar_path(path), json.dumps(rec.meta(), indent=2) + "\n")


def read_cohort_manifest(path: str | Path) -> list[tuple[str, Path]]:
    """Rows of ``subject_id,path``, sorted by subject_id; relative paths resolve against the manifest."""
    path = Path(path)
    if not path.is_file():
        raise LoadError(f"{path}: manifest not found")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyManifest(f"{path}: file is empty")
        if not {"subject_id", "path"} <= set(reader.fieldnames):
            raise LoadError(f"{path}: manifest header must be subject_id,path")
        out = []
        for row in reader:
            p = Path(row["path"])
            if not p.is_absolute():
                p = path.parent / p
            out.append((row["subject_id"], p))
    if not out:
        raise EmptyManifest(f"{path}: no recordings listed")
    return sorted(out)


# ---------------------------------------------------------------------------
# processing


def resample_to_400hz(rec: Recording, fs_out: float = TARGET_FS) -> Recording:
    """Linear-interpolation resample of every channel onto a uniform ``fs_out`` grid."""
    if rec.sampling_rate == fs_out:
        return Recording(**{**_fields(rec), **{k: v.copy() for k, v in rec.channels().items()}})
    t_in = np.arange(rec.n_samples) / rec.sampling_rate
    span = (rec.n_samples - 1) / rec.sampling_rate
    n_out = int(np.floor(span * fs_out + 1e-9)) + 1
    t_out = np.arange(n_out) / fs_out
    new = {k: np.interp(t_out, t_in, v) for k, v in rec.channels().items()}
    return Recording(**{**_fields(rec), **new, "sampling_rate": fs_out})


def _fields(rec: Recording) -> dict:
    return dict(subject_id=rec.subject_id, group=rec.group, age=rec.age, bmi=rec.bmi,
                sampling_rate=rec.sampling_rate, cbfv_left=rec.cbfv_left,
                cbfv_right=rec.cbfv_right, ecg=rec.ecg)


def _longest_constant_run(x: np.ndarray) -> int:
    if len(x) == 0:
        return 0
    change = np.flatnonzero(np.diff(x) != 0)
    bounds = np.concatenate(([-1], change, [len(x) - 1]))
    return int(np.diff(bounds).max())


def _plateau_count(x: np.ndarray, level: float) -> int:
    """Samples at ``level`` whose neighbour is also at ``level``.

    An isolated touch of the extreme (the apex of every beat in a noise-free
    periodic signal) is not a plateau.
    """
    at = x == level
    pair = at[1:] & at[:-1]
    return int(np.count_nonzero(np.r_[pair, False] | np.r_[False, pair]))


def _hf_fraction(x: np.ndarray, fs: float, cutoff: float) -> float:
    x = x - x.mean()
    power = np.abs(np.fft.rfft(x)) ** 2
    total = power[1:].sum()
    if total == 0:
        return 0.0
    freqs = np.fft.rfftfreq(len(x), 1.0 / fs)
    return float(power[freqs > cutoff].sum() / total)


def channel_flags(x: np.ndarray, fs: float, cfg: QualityConfig = QualityConfig()) -> dict[str, bool]:
    n = len(x)
    too_short = n / fs < cfg.min_beats * cfg.min_beat_s
    has_gaps = _longest_constant_run(x) / fs > cfg.max_flat_run_s
    clipped = n > 1 and (_plateau_count(x, x.min()) + _plateau_count(x, x.max())) / n > cfg.max_clip_fraction
    noisy = n > 1 and _hf_fraction(x, fs, cfg.noise_cutoff_hz) > cfg.max_noise_fraction
    return {"too_short": bool(too_short), "has_gaps": bool(has_gaps),
            "clipped": bool(clipped), "excessive_noise": bool(noisy)}


def quality_check(rec: Recording, cfg: QualityConfig = QualityConfig()) -> QualityReport:
    flags = {name: channel_flags(x, rec.sampling_rate, cfg) for name, x in rec.channels().items()}
    return QualityReport(subject_id=rec.subject_id, flags=flags)


def segment_entries(
    rec: Recording,
    onsets: Mapping[str, Sequence[int]],
    r_peaks: Sequence[int] | None = None,
) -> list[EntrySegment]:
    """Cut each side into consecutive, non-overlapping windows of 360 beats.

    Windows holding a beat shorter than 0.3 s or longer than 2.0 s are dropped;
    the trailing partial window is discarded.
    """
    fs = rec.sampling_rate
    entries = []
    for side in SIDES:
        if side not in onsets:
            continue
        idx = np.asarray(onsets[side], dtype=np.int64)
        if len(idx) < BEATS_PER_ENTRY + 1:
            raise FewerThan360Beats(f"{rec.subject_id}/{side}: {max(len(idx) - 1, 0)} beats")
        x = rec.cbfv(side)
        for w in range((len(idx) - 1) // BEATS_PER_ENTRY):
            b = idx[w * BEATS_PER_ENTRY: (w + 1) * BEATS_PER_ENTRY + 1]
            dur = np.diff(b) / fs
            if np.any(dur < MIN_BEAT_S - 1e-9) or np.any(dur > MAX_BEAT_S + 1e-9):
                continue
            q = None
            if r_peaks is not None:
                r = np.asarray(r_peaks, dtype=np.int64)
                q = r[(r >= b[0] - int(MAX_BEAT_S * fs)) & (r < b[-1])] - b[0]
            entries.append(EntrySegment(
                subject_id=rec.subject_id, side=side,
                samples=x[b[0]: b[-1] + 1].copy(), beat_onsets=b - b[0],
                qrs_peaks=q, fs=fs,
            ))
    return entries
