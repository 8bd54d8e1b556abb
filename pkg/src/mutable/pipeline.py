"""End-to-end replay pipeline.

One pass over a trace: detect taps from the IMU records, ship each tap
over the simulated channel, resolve its position (always for the
continuous policy, only on planar movement for the adaptive policy),
apply the depth gate and hit test, and account per-stage latency. The
run is a pure function of (trace, config, seed); latency draws come from
per-event substreams so the two policies see identical randomness.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .config import POLICY_CONTINUOUS, PipelineConfig
from .detector import Detector, jerk
from .discretization import discretize
from .errors import InvalidStreamError
from .instrument import SoundTrigger, amplitude_for, hit_test, pan_for
from .localization import MovementTracker, PositionCache, depth_gate, resolve_position
from .transport import Channel, RawAccelMessage, TapMessage, encode_raw, encode_tap
from .types import (
    HandObservation,
    HitEvent,
    ImuSample,
    Label,
    LatencyBreakdown,
    TapEvent,
    TraceRecord,
    validate_stream,
)

DROP_NO_HAND = "no-hand"
DROP_DEPTH_GATE = "depth-gate"
DROP_OUT_OF_BOUNDS = "out-of-bounds"
DROP_CHANNEL = "channel"

_COMM_STREAM = 0
_LOC_STREAM = 1


@dataclass(frozen=True)
class Drop:
    tap: TapEvent
    reason: str


@dataclass(frozen=True)
class DetectionMetrics:
    tp: int
    fp: int
    fn: int

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def accuracy(self) -> float:
        denom = self.tp + self.fp + self.fn
        return self.tp / denom if denom else 0.0

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "recall": self.recall,
            "precision": self.precision,
            "accuracy": self.accuracy,
        }


def latency_stats(values: Sequence[float]) -> dict:
    if not values:
        return {"count": 0, "mean": 0.0, "p50": 0.0, "p95": 0.0, "p99": 0.0, "min": 0.0, "max": 0.0}
    arr = np.asarray(values, dtype=float)
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
        "p99": float(np.percentile(arr, 99)),
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


@dataclass
class RunReport:
    policy: str
    payload: int
    seed: int
    hits: list[HitEvent]
    drops: list[Drop]
    detections: list[TapEvent]
    detection: DetectionMetrics
    label_outcomes: dict[str, int]
    localization_precision: Optional[float]
    latency: dict[str, dict]

    def triggers(self) -> list[SoundTrigger]:
        return [
            SoundTrigger(
                drum_id=h.drum_id,
                amplitude=h.amplitude,
                pan=h.pan,
                t_fire=h.tap.t + int(round(h.latency.total_ms * 1000.0)),
            )
            for h in self.hits
            if h.drum_id is not None
        ]

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "payload": self.payload,
            "seed": self.seed,
            "counts": {
                "detections": len(self.detections),
                "hits": len(self.hits),
                "drops": len(self.drops),
            },
            "hits": [
                {
                    "seq": h.tap.seq,
                    "t": h.tap.t,
                    "intensity": h.tap.intensity,
                    "level": h.tap.level,
                    "movement": h.tap.movement_flag,
                    "drum": h.drum_id,
                    "position": [h.position[0], h.position[1]],
                    "amplitude": h.amplitude,
                    "pan": [h.pan[0], h.pan[1]],
                    "comm_ms": h.latency.comm_ms,
                    "localization_ms": h.latency.localization_ms,
                    "total_ms": h.latency.total_ms,
                    "t_fire": h.tap.t + int(round(h.latency.total_ms * 1000.0)),
                }
                for h in self.hits
            ],
            "drops": [{"seq": d.tap.seq, "t": d.tap.t, "reason": d.reason} for d in self.drops],
            "detection": self.detection.to_dict(),
            "label_outcomes": dict(self.label_outcomes),
            "localization_precision": self.localization_precision,
            "latency_ms": self.latency,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def per_event_csv(self) -> str:
        lines = ["seq,t_us,drum,level,comm_ms,localization_ms,total_ms"]
        for h in self.hits:
            lines.append(
                f"{h.tap.seq},{h.tap.t},{h.drum_id},{h.tap.level},"
                f"{h.latency.comm_ms},{h.latency.localization_ms},{h.latency.total_ms}"
            )
        return "\n".join(lines) + "\n"


def split_records(records: Sequence[TraceRecord]):
    imu = [r for r in records if isinstance(r, ImuSample)]
    hands = [r for r in records if isinstance(r, HandObservation)]
    labels = [r for r in records if isinstance(r, Label)]
    return imu, hands, labels


def detect_with_movement(imu: Sequence[ImuSample], cfg: PipelineConfig) -> list[TapEvent]:
    """Detection pass that also stamps movement flags and intensity levels."""
    det = Detector(cfg=cfg.detector)
    tracker = MovementTracker(theta_move=cfg.movement_theta_g, window=cfg.movement_window)
    binning = cfg.binning
    taps: list[TapEvent] = []
    prev: Optional[ImuSample] = None
    for sample in imu:
        if prev is not None:
            tracker.update(jerk(prev, sample))
        event = det.step(sample)
        if event is not None:
            taps.append(
                replace(
                    event,
                    movement_flag=tracker.moved,
                    level=discretize(event.intensity, binning),
                )
            )
            tracker.reset()
        prev = sample
    return taps


def _nearest_hand(hands: Sequence[HandObservation], t: int) -> Optional[HandObservation]:
    if not hands:
        return None
    ts = [h.t for h in hands]
    i = bisect.bisect_right(ts, t)
    return hands[i - 1] if i > 0 else hands[0]


def _encode_payload(tap: TapEvent, sample: ImuSample, payload: int) -> bytes:
    if payload == 24:
        return encode_tap(
            TapMessage(
                seq=tap.seq & 0xFFFF,
                t=tap.t,
                intensity=tap.intensity,
                level=tap.level,
                movement_flag=tap.movement_flag,
            )
        )
    return encode_raw(RawAccelMessage(t=sample.t, ax=sample.ax, ay=sample.ay, az=sample.az))


def match_taps_to_labels(
    detections: Sequence[TapEvent], labels: Sequence[Label], window_ms: float
) -> tuple[DetectionMetrics, dict[int, Label]]:
    """Greedy nearest-in-time one-to-one matching of detections to tap labels.

    Returns the confusion counts and a map from detection seq to its label.
    """
    window_us = window_ms * 1000.0
    tap_labels = sorted((l for l in labels if l.is_tap), key=lambda l: l.t)
    times = [l.t for l in tap_labels]
    used = [False] * len(tap_labels)
    assigned: dict[int, Label] = {}
    for det in detections:
        mid = bisect.bisect_left(times, det.t)
        best_j = None
        best_dt = None
        j = mid - 1
        while j >= 0 and det.t - times[j] <= window_us:
            if not used[j] and (best_dt is None or det.t - times[j] < best_dt):
                best_j, best_dt = j, det.t - times[j]
            j -= 1
        j = mid
        while j < len(times) and times[j] - det.t <= window_us:
            if not used[j] and (best_dt is None or times[j] - det.t < best_dt):
                best_j, best_dt = j, times[j] - det.t
            j += 1
        if best_j is not None:
            used[best_j] = True
            assigned[det.seq] = tap_labels[best_j]
    tp = len(assigned)
    fp = len(detections) - tp
    fn = len(tap_labels) - tp
    return DetectionMetrics(tp=tp, fp=fp, fn=fn), assigned


def evaluate(
    detections: Sequence[TapEvent],
    labels: Sequence[Label],
    match_window_ms: float = 150.0,
) -> DetectionMetrics:
    """Score a detection list against ground-truth labels."""
    metrics, _ = match_taps_to_labels(detections, labels, match_window_ms)
    return metrics


def run(records: Sequence[TraceRecord], cfg: PipelineConfig, seed: int = 0) -> RunReport:
    """Replay a trace through the full pipeline under one policy."""
    report = validate_stream(records)
    if not report.valid:
        raise InvalidStreamError(report.violations)

    imu, hands, labels = split_records(records)
    taps = detect_with_movement(imu, cfg)
    sample_by_t = {s.t: s for s in imu}

    channel = Channel(
        model=cfg.latency, seed=np.random.SeedSequence(entropy=seed, spawn_key=(_COMM_STREAM,))
    )
    cache = PositionCache()
    force_localize = cfg.policy == POLICY_CONTINUOUS

    hits: list[HitEvent] = []
    drops: list[Drop] = []
    for tap in taps:
        delivery = channel.send(_encode_payload(tap, sample_by_t[tap.t], cfg.payload), tap.t)
        if delivery.dropped:
            drops.append(Drop(tap, DROP_CHANNEL))
            continue
        truth = _nearest_hand(hands, tap.t)
        if truth is None:
            drops.append(Drop(tap, DROP_NO_HAND))
            continue
        loc_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(_LOC_STREAM, tap.seq))
        )
        resolved = resolve_position(
            tap, cache, cfg.localizer, truth, loc_rng, force_localize=force_localize
        )
        if resolved is None:
            drops.append(Drop(tap, DROP_NO_HAND))
            continue
        (x, y, z), loc_ms = resolved
        if not depth_gate(z, cfg.profile.surface_depth_m, cfg.depth_tol_m):
            drops.append(Drop(tap, DROP_DEPTH_GATE))
            continue
        drum = hit_test((x, y), cfg.layout)
        if drum is None:
            drops.append(Drop(tap, DROP_OUT_OF_BOUNDS))
            continue
        cache.last_drum = drum
        latency = LatencyBreakdown.of(delivery.comm_ms, loc_ms)
        hits.append(
            HitEvent(
                tap=tap,
                drum_id=drum,
                position=(x, y),
                latency=latency,
                amplitude=amplitude_for(tap.level, cfg.num_levels),
                pan=pan_for(x, cfg.layout.surface_w),
            )
        )

    detection, assigned = match_taps_to_labels(taps, labels, cfg.match_window_ms)

    hit_seqs = {h.tap.seq for h in hits}
    drop_seqs = {d.tap.seq for d in drops}
    outcomes = {"hit": 0, "drop": 0, "miss": 0}
    for seq in assigned:
        if seq in hit_seqs:
            outcomes["hit"] += 1
        elif seq in drop_seqs:
            outcomes["drop"] += 1
    outcomes["miss"] = sum(1 for l in labels if l.is_tap) - len(assigned)

    loc_precision = _localization_precision(hits, assigned, cfg)

    return RunReport(
        policy=cfg.policy,
        payload=cfg.payload,
        seed=seed,
        hits=hits,
        drops=drops,
        detections=taps,
        detection=detection,
        label_outcomes=outcomes,
        localization_precision=loc_precision,
        latency={
            "comm_ms": latency_stats([h.latency.comm_ms for h in hits]),
            "localization_ms": latency_stats([h.latency.localization_ms for h in hits]),
            "total_ms": latency_stats([h.latency.total_ms for h in hits]),
        },
    )


def _localization_precision(
    hits: Sequence[HitEvent], assigned: dict[int, Label], cfg: PipelineConfig
) -> Optional[float]:
    """Fraction of labeled hits resolved within loc_radius_m of their drum pad."""
    total = 0
    correct = 0
    for h in hits:
        label = assigned.get(h.tap.seq)
        if label is None or label.drum_id is None:
            continue
        total += 1
        drum = cfg.layout.drum(label.drum_id)
        dx = h.position[0] - drum.center[0]
        dy = h.position[1] - drum.center[1]
        if (dx * dx + dy * dy) ** 0.5 <= drum.radius + cfg.loc_radius_m:
            correct += 1
    return correct / total if total else None
