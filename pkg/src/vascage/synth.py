"""Synthetic cohorts with known vascular-age acceleration.

Every constant here is a generator design choice. The pulse model only encodes
the qualitative direction observed in aging CBFV (lower first-peak amplitude,
relatively larger late peaks, later systolic timing), so that recovering an
injected acceleration end to end is a fair test of the pipeline.

Pulse model for one beat of duration ``T`` (time ``tau`` from the foot)::

    f(tau) = baseline + sum_k A_k exp(-(tau - t_k)^2 / (2 s_k^2))
             + D (1 - exp(-tau / tau_d)) (1 - (tau / T)^6)

with ``s_k = width_k / (2 sqrt(2 ln 2))`` (widths are full widths at half
maximum). The last term is a diastolic level that starts at zero on the foot
and falls back to zero at the next foot, giving a continuous beat train whose
minimum sits exactly on each beat start. The sixth power keeps the diastolic
level flat through most of the beat and makes the end-diastolic fall steep
enough for the foot to be located under noise.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DurationTooShort
from .ingest import BEATS_PER_ENTRY, GROUPS, Recording, write_recording
from ._io import write_atomic

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
DIASTOLIC_LEVEL = 25.0  # cm/s
DIASTOLIC_POWER = 6
DIASTOLIC_RISE = 0.03  # s
ECG_LEAD_S = 0.080

DEFAULT_ACCELERATION = {
    "acute_stroke": 6.1,
    "post_stroke": 5.5,
    "AD": 3.6,
    "MCI": 1.7,
    "established": 2.8,
}


@dataclass(frozen=True)
class PulseModelParams:
    amplitudes: tuple[float, float, float]
    centers: tuple[float, float, float]
    widths: tuple[float, float, float]
    baseline: float = 20.0

    def __post_init__(self):
        c = self.centers
        if not (c[0] < c[1] < c[2]):
            raise ValueError("bump centers must increase")
        if min(self.amplitudes) <= 0:
            raise ValueError("bump amplitudes must be positive")

    @property
    def sigmas(self) -> tuple[float, ...]:
        return tuple(w * FWHM_TO_SIGMA for w in self.widths)


def pulse_params(effective_age: float) -> PulseModelParams:
    d = effective_age - 20.0
    a1 = max(80.0 * (1.0 - 0.005 * d), 30.0)
    a2 = a1 * (0.45 + 0.004 * d)
    a3 = a1 * 0.3
    t1 = 0.10 + 0.0005 * d
    return PulseModelParams(
        amplitudes=(a1, a2, a3),
        centers=(t1, t1 + 0.12, t1 + 0.26),
        widths=(0.04, 0.06, 0.08),
        baseline=20.0,
    )


def pulse_waveform(params: PulseModelParams, tau: np.ndarray, period: float) -> np.ndarray:
    """Closed-form beat value at times ``tau`` (s) from the foot; ``period`` is the beat length."""
    tau = np.asarray(tau, dtype=float)
    out = np.full(tau.shape, params.baseline)
    for a, c, s in zip(params.amplitudes, params.centers, params.sigmas):
        out += a * np.exp(-((tau - c) ** 2) / (2 * s * s))
    out += DIASTOLIC_LEVEL * (1 - np.exp(-tau / DIASTOLIC_RISE)) * (1 - (tau / period) ** DIASTOLIC_POWER)
    return out


def pulse_derivative(params: PulseModelParams, tau, period: float):
    tau = np.asarray(tau, dtype=float)
    out = np.zeros(tau.shape)
    for a, c, s in zip(params.amplitudes, params.centers, params.sigmas):
        out += -a * (tau - c) / (s * s) * np.exp(-((tau - c) ** 2) / (2 * s * s))
    e = np.exp(-tau / DIASTOLIC_RISE)
    m = DIASTOLIC_POWER
    out += DIASTOLIC_LEVEL * (e / DIASTOLIC_RISE * (1 - (tau / period) ** m)
                              - (1 - e) * m * tau ** (m - 1) / period ** m)
    return out


def landmark_times(params: PulseModelParams, period: float) -> dict[str, float]:
    """Exact landmark times (s from the foot): roots of the model derivative.

    v1 is the foot itself (tau = 0). Roots are bracketed on a fine grid and
    polished with Brent's method.
    """
    grid = np.linspace(1e-6, period * 0.999, 20001)
    d = pulse_derivative(params, grid, period)
    sign = np.sign(d)
    idx = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    roots = []
    for i in idx:
        r = brentq(lambda t: float(pulse_derivative(params, t, period)), grid[i], grid[i + 1],
                   xtol=1e-14)
        kind = "p" if d[i] > 0 else "v"
        roots.append((r, kind))
    peaks = [r for r, k in roots if k == "p"]
    valleys = [r for r, k in roots if k == "v"]
    if len(peaks) != 3 or len(valleys) < 2:
        raise ValueError(f"pulse model has {len(peaks)} peaks, {len(valleys)} valleys")
    return {"v1": 0.0, "p1": peaks[0], "v2": valleys[0], "p2": peaks[1],
            "v3": valleys[1], "p3": peaks[2]}


# ---------------------------------------------------------------------------
# recordings


@dataclass(frozen=True)
class SubjectSpec:
    subject_id: str
    age: float
    acceleration: float = 0.0
    group: str = "healthy"
    heart_rate: float = 75.0
    rr_jitter: float = 0.02
    noise: float = 0.5
    seed: int = 0
    bmi: float = 24.0
    ecg_snr_db: float = 20.0
    side_perturbation: float = 0.02

    @property
    def effective_age(self) -> float:
        return self.age + self.acceleration

    def __post_init__(self):
        if not 20.0 <= self.effective_age <= 100.0:
            raise ConfigError(f"{self.subject_id}: effective age {self.effective_age} outside [20, 100]")


@dataclass
class GroundTruth:
    subject_id: str
    effective_age: float
    acceleration: float
    beat_onsets: np.ndarray
    r_peaks: np.ndarray
    rr_ms: np.ndarray
    landmark_times: dict[str, float]

    def to_json(self) -> dict:
        return {
            "effective_age": self.effective_age,
            "acceleration": self.acceleration,
            "landmark_times_s": self.landmark_times,
            "beat_onsets": self.beat_onsets.tolist(),
            "r_peaks": self.r_peaks.tolist(),
        }


def ecg_template(tau: np.ndarray) -> np.ndarray:
    """Single heartbeat (mV) with the R apex at tau = 0: small Q/S dips and a T wave."""
    r = 1.0 * np.exp(-(tau ** 2) / (2 * 0.010 ** 2))
    qs = -0.15 * (np.exp(-((tau + 0.025) ** 2) / (2 * 0.008 ** 2))
                  + np.exp(-((tau - 0.025) ** 2) / (2 * 0.008 ** 2)))
    t_wave = 0.25 * np.exp(-((tau - 0.25) ** 2) / (2 * 0.040 ** 2))
    p_wave = 0.10 * np.exp(-((tau + 0.16) ** 2) / (2 * 0.020 ** 2))
    return r + qs + t_wave + p_wave


def synth_ecg(r_peaks: np.ndarray, n: int, fs: float, snr_db: float | None,
              rng: np.random.Generator | None) -> np.ndarray:
    t = np.arange(n) / fs
    ecg = np.zeros(n)
    half = int(0.4 * fs)
    for r in r_peaks:
        lo, hi = max(0, r - half), min(n, r + half + 1)
        ecg[lo:hi] += ecg_template(t[lo:hi] - r / fs)
    if snr_db is not None and rng is not None:
        p_sig = float(np.mean(ecg ** 2))
        ecg = ecg + rng.normal(0.0, math.sqrt(p_sig / 10 ** (snr_db / 10)), n)
    return ecg


def rr_series(n_beats: int, heart_rate: float, jitter: float, fs: float,
              rng: np.random.Generator) -> np.ndarray:
    """Beat lengths in whole samples: ``60/hr * (1 + jitter * N(0, 1))``."""
    base = 60.0 / heart_rate
    rr = base * (1.0 + jitter * rng.standard_normal(n_beats))
    rr = np.clip(rr, 0.35, 1.9)
    return np.round(rr * fs).astype(np.int64)


def synth_recording(spec: SubjectSpec, duration: float = 300.0, fs: float = 400.0,
                    with_ecg: bool = True) -> tuple[Recording, GroundTruth]:
    """Beat train of model pulses plus optional ECG, quantized to 1e-4."""
    min_duration = (BEATS_PER_ENTRY + 1) * 60.0 / spec.heart_rate
    if duration < min_duration:
        raise DurationTooShort(f"{duration} s < {min_duration:.1f} s for 361 beats at {spec.heart_rate} bpm")
    rng = np.random.default_rng(spec.seed)
    n = int(round(duration * fs))
    lead = int(round(ECG_LEAD_S * fs))

    rr = rr_series(int(duration * spec.heart_rate / 60.0 * 1.3) + 4, spec.heart_rate,
                   spec.rr_jitter, fs, rng)
    onsets = lead + int(round(0.3 * fs)) + np.concatenate(([0], np.cumsum(rr)))
    onsets = onsets[onsets < n]

    params = pulse_params(spec.effective_age)
    t = np.arange(n) / fs
    clean = np.full(n, params.baseline)
    pulsatile = np.zeros(n)
    for k in range(len(onsets)):
        lo = onsets[k]
        hi = onsets[k + 1] if k + 1 < len(onsets) else n
        period = ((onsets[k + 1] - lo) if k + 1 < len(onsets) else rr[k]) / fs
        pulsatile[lo:hi] = pulse_waveform(params, t[lo:hi] - lo / fs, period) - params.baseline
    # samples before the first foot continue the previous (virtual) beat's diastole
    if onsets[0] > 0:
        period = rr[0] / fs
        tau = t[: onsets[0]] - (onsets[0] / fs - period)
        pulsatile[: onsets[0]] = pulse_waveform(params, tau, period) - params.baseline

    gain_r = 1.0 + spec.side_perturbation * rng.uniform(-1.0, 1.0)
    left = clean + pulsatile + spec.noise * rng.standard_normal(n)
    right = clean + gain_r * pulsatile + spec.noise * rng.standard_normal(n)

    r_peaks = onsets - lead
    ecg = synth_ecg(r_peaks, n, fs, spec.ecg_snr_db, rng) if with_ecg else None

    rec = Recording(
        subject_id=spec.subject_id, group=spec.group, age=spec.age, bmi=spec.bmi,
        sampling_rate=fs, cbfv_left=np.round(left, 4), cbfv_right=np.round(right, 4),
        ecg=None if ecg is None else np.round(ecg, 4),
    )
    truth = GroundTruth(
        subject_id=spec.subject_id,
        effective_age=spec.effective_age,
        acceleration=spec.acceleration,
        beat_onsets=onsets,
        r_peaks=r_peaks,
        rr_ms=np.diff(r_peaks) / fs * 1000.0,
        landmark_times=landmark_times(params, 60.0 / spec.heart_rate),
    )
    return rec, truth


# ---------------------------------------------------------------------------
# cohorts


@dataclass
class GroupConfig:
    n: int
    age_min: float = 50.0
    age_max: float = 85.0
    acceleration: float = 0.0
    crossover_age: float | None = None


@dataclass
class CohortConfig:
    groups: dict[str, GroupConfig] = field(default_factory=dict)
    duration_s: float = 330.0
    fs: float = 400.0
    noise: float = 0.5
    rr_jitter: float = 0.02
    heart_rate_range: tuple[float, float] = (68.0, 80.0)
    bmi_range: tuple[float, float] = (20.0, 30.0)
    ecg_snr_db: float = 20.0
    with_ecg: bool = True

    @classmethod
    def default(cls) -> "CohortConfig":
        groups = {"healthy": GroupConfig(n=200, age_min=50.0, age_max=85.0)}
        for g in ("acute_stroke", "post_stroke", "AD", "MCI", "established"):
            groups[g] = GroupConfig(n=40, age_min=50.0, age_max=80.0,
                                    acceleration=DEFAULT_ACCELERATION[g])
        return cls(groups=groups)

    @classmethod
    def from_dict(cls, d: Mapping) -> "CohortConfig":
        d = dict(d)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown cohort keys: {sorted(unknown)}")
        base = cls.default()
        groups = base.groups
        if "groups" in d:
            groups = {}
            for name, g in d.pop("groups").items():
                if name not in GROUPS:
                    raise ConfigError(f"unknown group {name!r}")
                bad = set(g) - set(GroupConfig.__dataclass_fields__)
                if bad:
                    raise ConfigError(f"unknown keys for group {name}: {sorted(bad)}")
                if "n" not in g or int(g["n"]) < 0:
                    raise ConfigError(f"group {name}: n must be a non-negative integer")
                if "acceleration" not in g:
                    g = {**g, "acceleration": DEFAULT_ACCELERATION.get(name, 0.0)}
                groups[name] = GroupConfig(**g)
        for key in ("heart_rate_range", "bmi_range"):
            if key in d:
                d[key] = tuple(float(v) for v in d[key])
        cfg = cls(groups=groups, **d)
        for name, g in cfg.groups.items():
            if g.age_max < g.age_min:
                raise ConfigError(f"group {name}: age_max < age_min")
        lo, hi = cfg.heart_rate_range
        if not 30 <= lo <= hi <= 150:
            raise ConfigError("heart_rate_range must lie within [30, 150] bpm")
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["heart_rate_range"] = list(self.heart_rate_range)
        d["bmi_range"] = list(self.bmi_range)
        return d


def subject_specs(cfg: CohortConfig, master_seed: int) -> list[SubjectSpec]:
    """Per-subject parameters; subject ``i`` draws from seed ``master_seed ^ i``."""
    specs = []
    index = 0
    for group in GROUPS:
        g = cfg.groups.get(group)
        if g is None or g.n == 0:
            continue
        for k in range(g.n):
            rng = np.random.default_rng(master_seed ^ index)
            age = float(np.round(rng.uniform(g.age_min, g.age_max), 2))
            accel = g.acceleration
            if g.crossover_age is not None and age <= g.crossover_age:
                accel = 0.0
            specs.append(SubjectSpec(
                subject_id=f"{group}_{k + 1:04d}",
                age=age,
                acceleration=accel,
                group=group,
                heart_rate=float(np.round(rng.uniform(*cfg.heart_rate_range), 2)),
                rr_jitter=cfg.rr_jitter,
                noise=cfg.noise,
                seed=int(rng.integers(2 ** 32)),
                bmi=float(np.round(rng.uniform(*cfg.bmi_range), 2)),
                ecg_snr_db=cfg.ecg_snr_db,
            ))
            index += 1
    return specs


def synth_cohort(cfg: CohortConfig, out_dir: str | Path, master_seed: int,
                 jobs: int = 1) -> Path:
    """Write recordings, sidecars, ``manifest.csv`` and ``ground_truth.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    rec_dir = out_dir / "recordings"
    rec_dir.mkdir(parents=True, exist_ok=True)
    specs = subject_specs(cfg, master_seed)

    args = [(s, cfg, str(rec_dir / f"{s.subject_id}.csv")) for s in specs]
    if jobs > 1 and len(args) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            truths = list(ex.map(_write_subject, args))
    else:
        truths = [_write_subject(a) for a in args]

    manifest = io.StringIO()
    w = csv.writer(manifest, lineterminator="\n")
    w.writerow(["subject_id", "path"])
    for s in specs:
        w.writerow([s.subject_id, f"recordings/{s.subject_id}.csv"])
    write_atomic(out_dir / "manifest.csv", manifest.getvalue())

    gt = {
        "master_seed": master_seed,
        "config": cfg.to_dict(),
        "subjects": {t["subject_id"]: {k: v for k, v in t.items() if k != "subject_id"}
                     for t in truths},
    }
    write_atomic(out_dir / "ground_truth.json", json.dumps(gt, indent=1, sort_keys=True) + "\n")
    return out_dir


def _write_subject(arg) -> dict:
    spec, cfg, path = arg
    rec, truth = synth_recording(spec, duration=cfg.duration_s, fs=cfg.fs, with_ecg=cfg.with_ecg)
    write_recording(rec, path)
    return {"subject_id": spec.subject_id, "group": spec.group, "age": spec.age,
            **truth.to_json()}
