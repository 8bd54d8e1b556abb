import numpy as np
import pytest

from mutable.detector import Detector, DetectorConfig, detect_all, jerk
from mutable.errors import InvalidConfigError, InvalidInputError
from mutable.scenarios import generate, hard_tap_scenario, soft_tap_scenario
from mutable.types import ImuSample

from conftest import SAMPLE_US, quiet_stream, with_dip


def offline_scan(stream, threshold=-0.5, debounce_ms=500.0):
    """Independent oracle: apply the definition directly over the whole trace."""
    events = []
    last = None
    for prev, curr in zip(stream, stream[1:]):
        jz = curr.az - prev.az
        if jz < threshold and (last is None or curr.t - last >= debounce_ms * 1000.0):
            events.append((curr.t, -jz))
            last = curr.t
    return events


def test_jerk_constant_signal_is_zero():
    a = ImuSample(t=0, ax=0, ay=0, az=1.0)
    b = ImuSample(t=SAMPLE_US, ax=0, ay=0, az=1.0)
    assert jerk(a, b).jz == 0.0


def test_jerk_arithmetic():
    a = ImuSample(t=0, ax=0.2, ay=0.1, az=1.0)
    b = ImuSample(t=SAMPLE_US, ax=0.0, ay=0.4, az=0.3)
    j = jerk(a, b)
    assert j.jz == pytest.approx(-0.7)
    assert j.jx == pytest.approx(-0.2)
    assert j.jy == pytest.approx(0.3)
    assert j.t == b.t


def test_jerk_dip_crosses_default_threshold():
    a = ImuSample(t=0, ax=0, ay=0, az=1.0)
    b = ImuSample(t=SAMPLE_US, ax=0, ay=0, az=0.4)
    assert jerk(a, b).jz == pytest.approx(-0.6)
    assert jerk(a, b).jz < DetectorConfig().threshold


def test_jerk_rejects_non_increasing_timestamps():
    a = ImuSample(t=100, ax=0, ay=0, az=1.0)
    with pytest.raises(InvalidInputError):
        jerk(a, a)


def test_config_invariants():
    with pytest.raises(InvalidConfigError):
        DetectorConfig(threshold=0.5)
    with pytest.raises(InvalidConfigError):
        DetectorConfig(debounce_ms=5.0)  # below one 104 Hz sample period


def test_single_crossing_yields_one_event_with_intensity():
    stream = with_dip(quiet_stream(n=300), 150, 0.6)
    events = detect_all(stream)
    assert len(events) == 1
    assert events[0].intensity == pytest.approx(0.6)
    assert events[0].t == stream[150].t
    assert events[0].seq == 0


def test_two_crossings_within_debounce_merge():
    # 100 ms apart (about 10 samples): the second crossing must be suppressed.
    stream = with_dip(with_dip(quiet_stream(n=300), 100, 1.0), 110, 1.0)
    events = detect_all(stream)
    assert len(events) == 1
    assert events[0].t == stream[100].t


def test_two_crossings_beyond_debounce_both_fire():
    # 600 ms apart with a 500 ms window; oracle applies the rule offline.
    stream = with_dip(with_dip(quiet_stream(n=300), 100, 1.0), 100 + 63, 1.0)
    assert (stream[163].t - stream[100].t) / 1000.0 >= 600
    events = detect_all(stream)
    oracle = offline_scan(stream)
    assert len(events) == len(oracle) == 2
    assert [e.t for e in events] == [t for t, _ in oracle]


def test_detect_all_empty_stream():
    assert detect_all([]) == []


def test_hard_tap_scenario_fully_detected():
    records = generate(hard_tap_scenario(n=20))
    stream = [r for r in records if isinstance(r, ImuSample)]
    assert len(detect_all(stream)) == 20


def test_soft_tap_scenario_split_matches_per_pulse_oracle():
    spec = soft_tap_scenario(n_detectable=44, n_sub=9)
    records = generate(spec)
    stream = [r for r in records if isinstance(r, ImuSample)]
    events = detect_all(stream)
    oracle = offline_scan(stream)
    assert len(events) == len(oracle) == 44
    assert len(spec.taps) - len(events) == 9


def test_leading_edge_fires_on_first_subthreshold_sample():
    # A two-sample staircase dip: the first crossing sample is the trigger.
    stream = quiet_stream(n=50)
    s1, s2 = stream[20], stream[21]
    stream[20] = ImuSample(t=s1.t, ax=0, ay=0, az=s1.az - 0.7)
    stream[21] = ImuSample(t=s2.t, ax=0, ay=0, az=s2.az - 1.4)
    events = detect_all(stream)
    assert events[0].t == stream[20].t
    assert events[0].intensity == pytest.approx(0.7)


class TestProperties:
    def _random_trace(self, seed, n_taps=8):
        rng = np.random.default_rng(seed)
        spacing = float(rng.uniform(0.55, 1.5))
        from mutable.scenarios import ScenarioSpec, TapSpec

        taps = tuple(
            TapSpec(t_s=1.0 + i * spacing, drum_id=2, dip_g=float(rng.uniform(0.8, 2.4)))
            for i in range(n_taps)
        )
        spec = ScenarioSpec(
            duration_s=2.0 + n_taps * spacing, taps=taps, seed=seed, noise_sigma_g=0.01
        )
        records = generate(spec)
        return [r for r in records if isinstance(r, ImuSample)]

    def test_debounce_spacing_always_respected(self):
        for seed in range(30):
            stream = self._random_trace(seed)
            events = detect_all(stream)
            gaps = [b.t - a.t for a, b in zip(events, events[1:])]
            assert all(g >= 500_000 for g in gaps)

    def test_lowering_threshold_never_loses_taps(self):
        for seed in range(10):
            stream = self._random_trace(seed)
            loose = len(detect_all(stream, DetectorConfig(threshold=-0.3)))
            tight = len(detect_all(stream, DetectorConfig(threshold=-0.7)))
            assert loose >= tight

    def test_streaming_equals_batch(self):
        for seed in range(20):
            stream = self._random_trace(seed)
            det = Detector()
            streamed = [e for s in stream for e in [det.step(s)] if e is not None]
            assert streamed == detect_all(stream)

    def test_intensity_scales_with_signal(self):
        stream = self._random_trace(7)
        base = detect_all(stream)
        for k in (1.5, 2.0, 3.0):
            scaled_stream = [
                ImuSample(t=s.t, ax=s.ax, ay=s.ay, az=s.az * k) for s in stream
            ]
            scaled = detect_all(scaled_stream)
            assert [e.t for e in scaled] == [e.t for e in base]
            for a, b in zip(base, scaled):
                assert b.intensity == pytest.approx(k * a.intensity)
