"""Band-side tap detector.

A tap shows up as a sharp negative spike in the per-sample difference of
vertical acceleration. Detection is leading-edge: the first sample whose
jerk drops below the (negative) threshold fires, and a refractory window
then suppresses re-triggering on the same physical strike.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InvalidConfigError, InvalidInputError
from .types import DEFAULT_SAMPLE_RATE_HZ, ImuSample, JerkSample, TapEvent

DEFAULT_THRESHOLD_G = -0.5
DEFAULT_DEBOUNCE_MS = 500.0


@dataclass(frozen=True)
class DetectorConfig:
    threshold: float = DEFAULT_THRESHOLD_G  # negative, in g
    debounce_ms: float = DEFAULT_DEBOUNCE_MS
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        if self.threshold >= 0:
            raise InvalidConfigError(f"threshold must be negative, got {self.threshold}")
        if self.debounce_ms <= 1000.0 / self.sample_rate_hz:
            raise InvalidConfigError(
                f"debounce {self.debounce_ms} ms must exceed one sample period "
                f"({1000.0 / self.sample_rate_hz:.2f} ms)"
            )


def jerk(prev: ImuSample, curr: ImuSample) -> JerkSample:
    """First difference of acceleration between two consecutive samples."""
    if curr.t <= prev.t:
        raise InvalidInputError(f"non-increasing timestamps: {prev.t} -> {curr.t}")
    return JerkSample(t=curr.t, jx=curr.ax - prev.ax, jy=curr.ay - prev.ay, jz=curr.az - prev.az)


@dataclass
class DetectorState:
    last_sample: Optional[ImuSample] = None
    last_tap_t: Optional[int] = None
    armed: bool = True
    next_seq: int = 0


@dataclass
class Detector:
    """Streaming detector; one instance per band stream."""

    cfg: DetectorConfig = field(default_factory=DetectorConfig)
    state: DetectorState = field(default_factory=DetectorState)

    def step(self, sample: ImuSample) -> Optional[TapEvent]:
        """Feed one sample; returns a TapEvent when this sample triggers."""
        st = self.state
        if st.last_sample is not None and sample.t <= st.last_sample.t:
            raise InvalidInputError(
                f"non-increasing timestamps: {st.last_sample.t} -> {sample.t}"
            )
        event = None
        debounce_us = self.cfg.debounce_ms * 1000.0
        st.armed = st.last_tap_t is None or sample.t - st.last_tap_t >= debounce_us
        if st.last_sample is not None:
            j = jerk(st.last_sample, sample)
            if j.jz < self.cfg.threshold and st.armed:
                event = TapEvent(
                    t=sample.t,
                    intensity=abs(j.jz),
                    level=1,  # assigned by the discretizer downstream
                    movement_flag=False,
                    seq=st.next_seq,
                )
                st.last_tap_t = sample.t
                st.next_seq += 1
                st.armed = False
        st.last_sample = sample
        return event


def detect_all(stream: Iterable[ImuSample], cfg: Optional[DetectorConfig] = None) -> list[TapEvent]:
    """Run the detector over a whole stream; equals folding step() sample by sample."""
    det = Detector(cfg=cfg or DetectorConfig())
    events = []
    for sample in stream:
        ev = det.step(sample)
        if ev is not None:
            events.append(ev)
    return events
