import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vascage.errors import LandmarksUndetectable, NoValidSide, ParseError, TooFewIntervals
from vascage.features import (
    HRV_NAMES,
    TOP10_NAMES,
    FeatureVector,
    Landmark,
    LandmarkSet,
    assemble_vector,
    build_default_manifest,
    detect_landmarks,
    eval_feature,
    hrv_features,
    load_manifest,
    parse_feature_name,
    serialize,
    validity_check,
    vector_names,
    write_manifest,
)
from vascage.features.grammar import LANDMARKS, LT, FeatureSpec, latency, ratio
from vascage.features.landmarks import curvature, symmetric_smooth
from vascage.pulse import GRID, DominantPulse
from vascage.synth import landmark_times, pulse_params, pulse_waveform

TAU = np.arange(GRID) / GRID


def model_pulse(e=60.0, T=0.8):
    p = pulse_params(e)
    return DominantPulse(pulse_waveform(p, TAU * T, T), 360, 360, T), landmark_times(p, T)


def synthetic_landmarks(times, qrs=-0.08, amps=None):
    amps = amps or {k: 10.0 + i for i, k in enumerate(LANDMARKS)}
    dt = 0.002
    pts = {k: Landmark(times[k], amps[k], int(round(times[k] / dt))) for k in LANDMARKS}
    return LandmarkSet(pts, qrs, np.linspace(0, 1, GRID), dt)


# -- grammar ---------------------------------------------------------------


def test_parse_examples():
    assert parse_feature_name("RLp1v2Lp1p2") == ratio(latency("p1", "v2"), latency("p1", "p2"))
    assert parse_feature_name("RLTLp1p3") == ratio(LT, latency("p1", "p3"))
    assert parse_feature_name("LT") == LT
    assert parse_feature_name("S2") == FeatureSpec("slope", (2,))
    assert parse_feature_name("dVp3") == FeatureSpec("amplitude", ("p3",))


@pytest.mark.parametrize("name,offset", [("Lq9", 1), ("Lp1", 3), ("X", 0), ("RLT", 3), ("S4", 1),
                                         ("LTx", 2), ("Kz1", 1), ("", 0)])
def test_parse_errors_report_offset(name, offset):
    with pytest.raises(ParseError) as exc:
        parse_feature_name(name)
    assert exc.value.offset == offset
    assert f"offset {offset}" in str(exc.value)


def test_top10_round_trip():
    for n in TOP10_NAMES:
        assert serialize(parse_feature_name(n)) == n


delay_st = st.one_of(st.just(LT), st.tuples(st.sampled_from(LANDMARKS), st.sampled_from(LANDMARKS)).map(
    lambda ab: latency(*ab)))
spec_st = st.one_of(
    delay_st,
    st.tuples(delay_st, delay_st).map(lambda d: ratio(*d)),
    st.sampled_from(LANDMARKS).map(lambda lm: FeatureSpec("amplitude", (lm,))),
    st.sampled_from(LANDMARKS).map(lambda lm: FeatureSpec("curvature", (lm,))),
    st.sampled_from([1, 2, 3]).map(lambda k: FeatureSpec("slope", (k,))),
    st.just(FeatureSpec("mac")),
)


@settings(max_examples=200)
@given(spec_st)
def test_grammar_round_trip_property(spec):
    assert parse_feature_name(serialize(spec)) == spec


# -- manifest --------------------------------------------------------------


def test_default_manifest():
    m = build_default_manifest()
    names = m.names
    assert len(names) == 128 and len(set(names)) == 128
    assert names[:10] == list(TOP10_NAMES)
    assert names[6] == "LT"
    assert all(serialize(parse_feature_name(n)) == n for n in names)
    assert names[10:16] == [f"dV{lm}" for lm in LANDMARKS]


def test_manifest_file_round_trip(tmp_path):
    m = build_default_manifest()
    write_manifest(m, tmp_path / "m.txt")
    assert (tmp_path / "m.txt").read_text() == m.text()
    assert load_manifest(tmp_path / "m.txt") == m


# -- landmarks -------------------------------------------------------------


@pytest.mark.parametrize("e", [20.0, 45.0, 70.0, 90.0])
def test_landmarks_match_closed_form(e):
    dp, truth = model_pulse(e)
    lm = detect_landmarks(dp)
    dt = 0.8 / GRID
    for k in LANDMARKS:
        assert abs(lm[k].grid_index - truth[k] / dt) <= 2, k


def test_landmark_ordering_and_l_v1p3():
    dp, truth = model_pulse(55.0)
    lm = detect_landmarks(dp)
    times = [lm[k].time for k in LANDMARKS]
    assert times == sorted(times)
    dt = 0.8 / GRID
    assert abs(eval_feature(latency("v1", "p3"), lm) - (truth["p3"] - truth["v1"])) <= 2 * dt


def test_monotone_ramp_is_undetectable():
    dp = DominantPulse(np.linspace(10, 90, GRID), 300, 360, 0.8)
    with pytest.raises(LandmarksUndetectable):
        detect_landmarks(dp)


def test_two_bump_degenerate_assignment():
    t = TAU * 0.8
    x = 20 + 60 * np.exp(-((t - 0.12) ** 2) / (2 * 0.02 ** 2)) + 25 * np.exp(-((t - 0.40) ** 2) / (2 * 0.03 ** 2))
    lm = detect_landmarks(DominantPulse(x, 300, 360, 0.8))
    idx = {k: lm[k].grid_index for k in LANDMARKS}
    assert idx["p1"] == idx["p2"] == idx["v2"]  # the more prominent first peak takes both roles
    assert idx["p3"] > idx["v3"] > idx["p2"]
    times = [lm[k].time for k in LANDMARKS]
    assert times == sorted(times)


def test_zero_delay_and_zero_denominator():
    times = dict(v1=0.0, p1=0.1, v2=0.1, p2=0.2, v3=0.3, p3=0.4)
    lm = synthetic_landmarks(times)
    assert eval_feature(latency("p1", "v2"), lm) == 0.0
    assert math.isnan(eval_feature(ratio(latency("p2", "p3"), latency("p1", "v2")), lm))


def test_lt_without_ecg_is_invalid():
    lm = synthetic_landmarks(dict(v1=0.0, p1=0.1, v2=0.15, p2=0.2, v3=0.3, p3=0.4), qrs=None)
    assert math.isnan(eval_feature(LT, lm))
    assert math.isnan(eval_feature(parse_feature_name("RLTLp1p3"), lm))


def test_top10_evaluate_on_synthetic_landmarks():
    times = dict(v1=0.0, p1=0.1, v2=0.15, p2=0.22, v3=0.3, p3=0.36)
    lm = synthetic_landmarks(times, qrs=-0.08)
    expected = {
        "RLp1v2Lp1p2": 0.05 / 0.12, "RLTLp1p3": 0.08 / 0.26, "RLTLv1p2": 0.08 / 0.22,
        "RLTLp1p2": 0.08 / 0.12, "RLTLv1p3": 0.08 / 0.36, "Lv1p3": 0.36, "LT": 0.08,
        "RLTLp2p3": 0.08 / 0.14, "RLTLv2p2": 0.08 / 0.07, "RLv1p1Lv1p3": 0.1 / 0.36,
    }
    for name, v in expected.items():
        assert eval_feature(parse_feature_name(name), lm) == pytest.approx(v, rel=1e-12)


def test_linear_pulse_has_zero_curvature():
    x = np.linspace(5, 40, GRID)
    s = symmetric_smooth(x, 13)
    np.testing.assert_allclose(s, x, atol=1e-12)
    assert np.max(curvature(s, 0.002)) < 1e-9


def test_time_scaling_leaves_ratios_unchanged():
    dp, _ = model_pulse(65.0)
    lm = detect_landmarks(dp, -0.08)
    m = build_default_manifest()
    for c in (0.5, 1.7):
        scaled = lm.time_scaled(c)
        for spec in m:
            if spec.kind == "ratio":
                assert eval_feature(spec, scaled) == pytest.approx(eval_feature(spec, lm), rel=1e-12, abs=1e-12)
            elif spec.kind in ("latency", "lt"):
                assert eval_feature(spec, scaled) == pytest.approx(c * eval_feature(spec, lm), rel=1e-12)


def test_amplitude_shift_invariance():
    dp, _ = model_pulse(65.0)
    shifted = DominantPulse(dp.samples + 13.0, dp.member_count, dp.total_beats, dp.mean_beat_duration)
    a, b = detect_landmarks(dp, -0.08), detect_landmarks(shifted, -0.08)
    for spec in build_default_manifest():
        if spec.kind in ("amplitude", "latency", "lt", "ratio"):
            assert eval_feature(spec, b) == pytest.approx(eval_feature(spec, a), rel=1e-9, abs=1e-9)


# -- HRV -------------------------------------------------------------------


def test_hrv_constant_series():
    h = hrv_features(np.full(50, 800.0))
    assert h.MeanNN == 800 and h.SDNN == 0 and h.RMSSD == 0 and h.pNN50 == 0 and h.MeanHR == 75


def test_hrv_two_element_case():
    h = hrv_features(np.array([800.0, 850.0]), min_intervals=2)
    assert h.RMSSD == 50 and h.SDSD == 0


def test_hrv_too_few():
    with pytest.raises(TooFewIntervals):
        hrv_features(np.full(9, 800.0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(300, 2000), min_size=10, max_size=400))
def test_hrv_matches_oracle_and_invariants(rr):
    h = hrv_features(np.array(rr))
    ref = oracles.hrv(rr)
    for k in HRV_NAMES:
        assert getattr(h, k) == pytest.approx(ref[k], rel=1e-9, abs=1e-9)
    assert 0 <= h.pNN50 <= h.pNN20 <= 1
    assert h.CVNN == pytest.approx(h.SDNN / h.MeanNN)


# -- vector ----------------------------------------------------------------


def test_vector_layout_and_side_aggregation():
    m = build_default_manifest()
    dp, _ = model_pulse(60.0)
    lm = detect_landmarks(dp, -0.08)
    hrv = hrv_features(np.full(30, 800.0))
    one = assemble_vector(m, {"left": (lm, dp)}, hrv, 24.5)
    both = assemble_vector(m, {"left": (lm, dp), "right": (lm, dp)}, hrv, 24.5)
    assert len(one.values) == 137 and len(vector_names(m)) == 137
    assert vector_names(m)[128] == "BMI" and vector_names(m)[129:] == list(HRV_NAMES)
    np.testing.assert_array_equal(one.values, both.values)
    assert one.values[128] == 24.5
    only_left = assemble_vector(m, {"left": (lm, dp), "right": None}, hrv, 24.5)
    np.testing.assert_array_equal(only_left.values, one.values)
    assert only_left.valid_sides == ("left",)
    assert validity_check(one)
    with pytest.raises(NoValidSide):
        assemble_vector(m, {"left": None, "right": None}, hrv, 24.5)


def test_validity_threshold():
    v = np.ones(137)
    ok = np.ones(137, bool)
    ok[:6] = False
    v[:6] = np.nan
    assert validity_check(FeatureVector("s", v, ok, ("left",)))
    ok[:10] = False
    v[:10] = np.nan
    assert not validity_check(FeatureVector("s", v, ok, ("left",)))
    assert not validity_check(FeatureVector("s", np.ones(137), np.ones(137, bool), ()))
