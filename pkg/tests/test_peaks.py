import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnshift.errors import ConfigError, ValidationError
from bnshift.peaks import PeakDetector, PeakDetectorConfig, detect_offline

values = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False, allow_infinity=False)
streams = st.lists(values, min_size=0, max_size=60)


def cfg(window=3, threshold=15.0, k=0.1):
    return PeakDetectorConfig(window_size=window, threshold=threshold, influence=k)


# --- configuration ------------------------------------------------------------


def test_config_defaults_match_deployment_values():
    c = PeakDetectorConfig()
    assert (c.window_size, c.threshold, c.influence) == (10, 15.0, 0.1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"window_size": 1},
        {"window_size": 0},
        {"threshold": 0.0},
        {"threshold": -3.0},
        {"influence": -0.1},
        {"influence": 1.5},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        PeakDetectorConfig(**kwargs)


# --- warm-up ------------------------------------------------------------------


def test_no_zscore_during_warmup():
    detector = PeakDetector(cfg(window=4))
    for t, v in enumerate([5.0, 6.0, 4.0]):
        obs = detector.observe(v, t)
        assert obs.z_score is None and not obs.is_peak
    assert not detector.initialized
    obs = detector.observe(5.5, 3)  # fills the window: stats init, still no z
    assert obs.z_score is None and not obs.is_peak
    assert detector.initialized
    obs = detector.observe(5.5, 4)  # first scored observation
    assert obs.z_score is not None


def test_short_stream_never_scores():
    out = detect_offline([1.0, 2.0, 3.0], cfg(window=10))
    assert all(o.z_score is None and not o.is_peak for o in out)


def test_constant_stream_never_peaks():
    out = detect_offline([1.0] * 10, cfg(window=3))
    assert not any(o.is_peak for o in out)
    assert all(o.z_score == 0.0 for o in out if o.z_score is not None)


def test_upward_step_after_constant_warmup_is_a_peak():
    # zero-variance baseline: any upward deviation exceeds the epsilon guard
    out = detect_offline([1.0, 1.0, 1.0, 1.0 + 1e-6], cfg(window=3))
    assert out[-1].is_peak


# --- the hand-computed trace ----------------------------------------------------


def test_hand_computed_trace():
    # window [1.0, 1.1, 0.9] then incoming 3.0, window 3, threshold 15, k 0.1;
    # expectations derived by hand from first principles (population std)
    sigma0 = math.sqrt((0.0**2 + 0.1**2 + 0.1**2) / 3.0)
    z_expected = (3.0 - 1.0) / sigma0
    mu_c = (1.1 + 0.9 + 3.0) / 3.0
    sigma_c = math.sqrt(((1.1 - mu_c) ** 2 + (0.9 - mu_c) ** 2 + (3.0 - mu_c) ** 2) / 3.0)
    mu_r_expected = 0.9 * 1.0 + 0.1 * mu_c
    sigma_r_expected = 0.9 * sigma0 + 0.1 * sigma_c

    detector = PeakDetector(cfg())
    for t, v in enumerate([1.0, 1.1, 0.9]):
        detector.observe(v, t)
    assert detector.running_mean == pytest.approx(1.0, abs=1e-12)
    assert detector.running_std == pytest.approx(sigma0, abs=1e-12)

    obs = detector.observe(3.0, 3)
    assert obs.is_peak
    assert obs.z_score == pytest.approx(z_expected, abs=1e-9)
    assert obs.z_score == pytest.approx(24.49489742783178, abs=1e-9)
    assert detector.window == (1.1, 0.9, 3.0)
    assert detector.running_mean == pytest.approx(1.0666666666666667, abs=1e-9)
    assert detector.running_mean == pytest.approx(mu_r_expected, abs=1e-12)
    assert detector.running_std == pytest.approx(sigma_r_expected, abs=1e-12)
    assert detector.running_std == pytest.approx(0.16811848939401797, abs=1e-9)


def test_hand_computed_trace_offline_matches():
    out = detect_offline([1.0, 1.1, 0.9, 3.0], cfg())
    assert [o.is_peak for o in out] == [False, False, False, True]
    assert out[3].z_score == pytest.approx(24.49489742783178, abs=1e-9)


# --- properties -----------------------------------------------------------------


def test_detect_offline_empty():
    assert detect_offline([], cfg()) == []


@given(streams, st.integers(min_value=2, max_value=8), st.floats(min_value=0.5, max_value=30.0))
@settings(max_examples=200, deadline=None)
def test_streaming_equals_offline_bit_exact(stream, window, threshold):
    c = cfg(window=window, threshold=threshold)
    detector = PeakDetector(c)
    streamed = [detector.observe(v, t) for t, v in enumerate(stream)]
    assert streamed == detect_offline(stream, c)


@given(streams)
@settings(max_examples=150, deadline=None)
def test_higher_threshold_detects_a_subset(stream):
    lo = detect_offline(stream, cfg(threshold=2.0))
    hi = detect_offline(stream, cfg(threshold=6.0))
    lo_peaks = {o.t for o in lo if o.is_peak}
    hi_peaks = {o.t for o in hi if o.is_peak}
    assert hi_peaks <= lo_peaks
    # running statistics are threshold-independent, so z traces agree exactly
    assert [o.z_score for o in lo] == [o.z_score for o in hi]


def test_downward_spike_is_not_a_peak():
    out = detect_offline([1.0, 1.1, 0.9, -50.0], cfg(threshold=3.0))
    assert not out[-1].is_peak
    assert out[-1].z_score < -3.0


def test_zero_influence_freezes_running_stats():
    detector = PeakDetector(cfg(window=3, k=0.0))
    for t, v in enumerate([1.0, 1.1, 0.9]):
        detector.observe(v, t)
    mu, sigma = detector.running_mean, detector.running_std
    for t, v in enumerate([5.0, -3.0, 100.0, 2.0], start=3):
        detector.observe(v, t)
    assert detector.running_mean == mu
    assert detector.running_std == sigma


def test_peak_value_enters_window_and_stats():
    # no influence-free branch: the peak itself shifts the running stats
    detector = PeakDetector(cfg(window=3, k=1.0))
    for t, v in enumerate([1.0, 1.0, 1.0]):
        detector.observe(v, t)
    detector.observe(100.0, 3)
    assert 100.0 in detector.window
    assert detector.running_mean == pytest.approx((1.0 + 1.0 + 100.0) / 3.0)


def test_observe_rejects_non_finite():
    detector = PeakDetector(cfg())
    with pytest.raises(ValidationError):
        detector.observe(float("nan"), 0)
    with pytest.raises(ValidationError):
        detector.observe(float("inf"), 0)
