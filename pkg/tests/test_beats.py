import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vascage.beats import detect_pulse_onsets, detect_qrs, rr_intervals
from vascage.errors import NoBeatsFound, SignalTooShort, TooFewPeaks
from vascage.synth import (
    SubjectSpec,
    pulse_params,
    pulse_waveform,
    rr_series,
    synth_ecg,
    synth_recording,
)

FS = 400.0


def spike_train_ecg(rr_samples, n, snr_db, seed):
    r = np.cumsum(np.concatenate(([200], rr_samples)))
    r = r[r < n - 200]
    return synth_ecg(r, n, FS, snr_db, np.random.default_rng(seed)), r


def test_qrs_fixed_rr_10db():
    n = int(60 * FS)
    ecg, truth = spike_train_ecg(np.full(100, 320), n + 200, 10.0, 1)
    ecg = ecg[:n]
    truth = truth[truth < n]
    found = detect_qrs(ecg, FS)
    assert len(truth) == 75
    assert len(found) == 75
    assert np.max(np.abs(found - truth)) <= 0.005 * FS


def test_qrs_zero_signal():
    assert detect_qrs(np.zeros(4000), FS).size == 0


def test_qrs_repeated_template():
    ecg, truth = spike_train_ecg(np.full(9, 340), 10 * 340 + 400, None, 0)
    found = detect_qrs(ecg, FS)
    assert len(found) == 10
    np.testing.assert_array_equal(found, truth)


def test_qrs_short_signal():
    with pytest.raises(SignalTooShort):
        detect_qrs(np.zeros(int(1.5 * FS)), FS)


def test_qrs_amplitude_scale_invariance():
    ecg, _ = spike_train_ecg(rr_series(80, 72, 0.03, FS, np.random.default_rng(4)), int(40 * FS), 15.0, 2)
    base = detect_qrs(ecg, FS)
    for c in (0.01, 3.0, 250.0):
        np.testing.assert_array_equal(detect_qrs(c * ecg, FS), base)


def test_qrs_translation_equivariance():
    ecg, _ = spike_train_ecg(rr_series(80, 70, 0.02, FS, np.random.default_rng(8)), int(40 * FS), 15.0, 3)
    base = detect_qrs(ecg, FS)
    k = 37
    shifted = detect_qrs(np.concatenate((np.zeros(k) + ecg[0], ecg)), FS)
    interior = base[(base > 2 * FS) & (base < len(ecg) - 2 * FS)]
    assert set((interior + k).tolist()) <= set(shifted.tolist())


def test_rr_examples():
    np.testing.assert_allclose(rr_intervals(np.array([0, 320, 640]), FS), [800.0, 800.0])
    np.testing.assert_allclose(rr_intervals(np.array([0, 320, 1320, 1644]), FS), [800.0, 810.0])
    with pytest.raises(TooFewPeaks):
        rr_intervals(np.array([5]), FS)


def test_rr_ectopic_filter():
    peaks = np.cumsum(np.concatenate(([0], np.full(10, 320), [200], np.full(10, 320))))
    rr = rr_intervals(peaks, FS)
    assert 500.0 not in rr and len(rr) < len(peaks) - 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(80, 1000), min_size=1, max_size=60))
def test_rr_properties(gaps):
    peaks = np.cumsum(np.concatenate(([0], gaps)))
    rr = rr_intervals(peaks, FS)
    assert len(rr) <= len(peaks) - 1
    assert np.all((rr >= 300) & (rr <= 2000))


def test_rr_recovers_jittered_series():
    rng = np.random.default_rng(11)
    rr_true = rr_series(120, 72, 0.02, FS, rng)
    ecg, truth = spike_train_ecg(rr_true, int(rr_true.sum() + 600), 12.0, 5)
    rr = rr_intervals(detect_qrs(ecg, FS), FS)
    ref = np.diff(truth) / FS * 1000
    assert len(rr) == len(ref)
    assert np.sqrt(np.mean((rr - ref) ** 2)) <= 5.0


def test_onsets_75_bpm_60s():
    spec = SubjectSpec("o", 60.0, heart_rate=75.0, rr_jitter=0.0, seed=3)
    rec, gt = synth_recording(spec, duration=361 * 0.8 + 1)
    n = int(60 * FS)
    found = detect_pulse_onsets(rec.cbfv_left[:n], FS)
    truth = gt.beat_onsets[gt.beat_onsets < n - 10]
    assert len(found) == len(truth) == 75
    assert np.max(np.abs(found - truth)) <= 0.010 * FS


def test_onsets_constant_signal():
    with pytest.raises(NoBeatsFound):
        detect_pulse_onsets(np.full(4000, 40.0), FS)


def test_onset_single_isolated_pulse():
    p = pulse_params(60.0)
    T = 0.8
    beat = pulse_waveform(p, np.arange(int(T * FS)) / FS, T)
    foot = 600
    x = np.concatenate((np.full(foot, beat[0]), beat, np.full(600, beat[-1])))
    found = detect_pulse_onsets(x, FS)
    assert len(found) == 1
    assert abs(int(found[0]) - foot) <= 2


def test_onsets_amplitude_scale_invariance():
    rec, _ = synth_recording(SubjectSpec("s", 66.0, seed=1, noise=0.3), duration=300.0)
    x = rec.cbfv_left[: int(60 * FS)]
    base = detect_pulse_onsets(x, FS)
    np.testing.assert_array_equal(detect_pulse_onsets(2.5 * x, FS), base)
    np.testing.assert_array_equal(detect_pulse_onsets(0.125 * x, FS), base)
