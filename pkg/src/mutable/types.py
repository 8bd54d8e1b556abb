"""Domain types shared by every stage of the pipeline.

Conventions: timestamps are integer microseconds, accelerations are in g,
positions are in meters with the surface origin at the projection's
top-left corner. All types are immutable values and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

DEFAULT_SAMPLE_RATE_HZ = 104


@dataclass(frozen=True)
class ImuSample:
    """One tri-axial accelerometer reading from the wrist band."""

    t: int  # microseconds
    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class JerkSample:
    """Per-sample first difference of acceleration, timestamped at the newer sample."""

    t: int
    jx: float
    jy: float
    jz: float


@dataclass(frozen=True)
class TapEvent:
    """A detected tap. Intensity is the magnitude of the triggering negative jerk."""

    t: int
    intensity: float  # g, > 0
    level: int  # discretized bin index, 1..num_levels
    movement_flag: bool  # planar movement since the previous tap
    seq: int


@dataclass(frozen=True)
class HandObservation:
    """Hand position on the surface plane plus its depth from the camera."""

    t: int
    x: float
    y: float
    z: float  # depth in meters, > 0
    confidence: float = 1.0


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-stage latency for one tap; total is always the exact sum."""

    comm_ms: float
    localization_ms: float
    total_ms: float

    @classmethod
    def of(cls, comm_ms: float, localization_ms: float) -> "LatencyBreakdown":
        return cls(comm_ms, localization_ms, comm_ms + localization_ms)


@dataclass(frozen=True)
class HitEvent:
    """A tap resolved against the instrument layout. No drum id means no sound."""

    tap: TapEvent
    drum_id: Optional[int]
    position: tuple[float, float]
    latency: LatencyBreakdown
    amplitude: float
    pan: tuple[float, float]


@dataclass(frozen=True)
class Label:
    """Ground-truth annotation used to score detection and localization."""

    t: int
    is_tap: bool
    is_soft: bool
    drum_id: Optional[int] = None


TraceRecord = Union[ImuSample, HandObservation, Label]


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str
    message: str

    def __str__(self) -> str:
        return f"[{self.index}] {self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def valid(self) -> bool:
        return not self.violations


def _check_units(i: int, rec: TraceRecord, out: list[Violation]) -> None:
    if isinstance(rec, ImuSample):
        for name in ("ax", "ay", "az"):
            if not math.isfinite(getattr(rec, name)):
                out.append(Violation(i, "units", f"imu {name} is not finite"))
    elif isinstance(rec, HandObservation):
        if not (math.isfinite(rec.x) and math.isfinite(rec.y)):
            out.append(Violation(i, "units", "hand x/y not finite"))
        if not (math.isfinite(rec.z) and rec.z > 0):
            out.append(Violation(i, "units", f"hand depth must be > 0, got {rec.z}"))
        if not 0.0 <= rec.confidence <= 1.0:
            out.append(Violation(i, "units", f"confidence outside [0,1]: {rec.confidence}"))
    if not isinstance(rec.t, int):
        out.append(Violation(i, "units", f"timestamp must be integer microseconds, got {rec.t!r}"))


def validate_stream(records) -> ValidationReport:
    """Check ordering and unit invariants over a record sequence.

    Records of all kinds must be sorted by timestamp; within each kind the
    timestamps must be strictly increasing. An empty report means the
    stream is valid.
    """
    violations: list[Violation] = []
    prev_t: Optional[int] = None
    prev_by_kind: dict[type, int] = {}
    for i, rec in enumerate(records):
        _check_units(i, rec, violations)
        if prev_t is not None and rec.t < prev_t:
            violations.append(
                Violation(i, "ordering", f"timestamp {rec.t} precedes {prev_t}")
            )
        prev_t = rec.t if prev_t is None else max(prev_t, rec.t)
        kind = type(rec)
        last = prev_by_kind.get(kind)
        if last is not None and rec.t <= last:
            violations.append(
                Violation(
                    i,
                    "ordering",
                    f"{kind.__name__} timestamps must strictly increase ({rec.t} after {last})",
                )
            )
        prev_by_kind[kind] = max(last, rec.t) if last is not None else rec.t
    return ValidationReport(violations)
