"""Live play sessions.

Each socket connection owns one session: its own debounce state, position
cache, channel, and RNG, so concurrent players never interact. A pointer
tap stands in for a physical strike: it becomes a one-pulse dip whose
intensity is the pressure mapped onto the detectable range, plus a hand
observation at the pointer with the calibrated surface depth.

No vision model runs in live mode (the pointer is ground truth), so the
session keeps the localizer's latency model but not its noise or failure
simulation.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import replace
from typing import Optional

import numpy as np

from ..calibration import calibrate_threshold
from ..config import POLICY_CONTINUOUS, PipelineConfig
from ..discretization import discretize
from ..errors import MutableError
from ..instrument import amplitude_for, hit_test, pan_for
from ..localization import PositionCache, depth_gate, resolve_position
from ..pipeline import DROP_DEPTH_GATE, DROP_NO_HAND, DROP_OUT_OF_BOUNDS, latency_stats
from ..transport import Channel, TapMessage, encode_tap
from ..types import HandObservation, ImuSample, LatencyBreakdown, TapEvent
from .schemas import (
    CalibrateMessage,
    CompositionMessage,
    HandMoveMessage,
    PointerTapMessage,
)

DROP_DEBOUNCE = "debounce"
# A pointer displacement beyond this counts as planar movement.
MOVE_EPSILON_M = 0.02


class MetricsCollector:
    """Rolling latency/outcome stats aggregated across sessions."""

    def __init__(self, window: int = 256):
        self._lock = threading.Lock()
        self._comm: deque[float] = deque(maxlen=window)
        self._loc: deque[float] = deque(maxlen=window)
        self._total: deque[float] = deque(maxlen=window)
        self.window = window
        self.fired = 0
        self.dropped: dict[str, int] = {}
        self.sessions = 0

    def record_fired(self, latency: LatencyBreakdown) -> None:
        with self._lock:
            self.fired += 1
            self._comm.append(latency.comm_ms)
            self._loc.append(latency.localization_ms)
            self._total.append(latency.total_ms)

    def record_drop(self, reason: str) -> None:
        with self._lock:
            self.dropped[reason] = self.dropped.get(reason, 0) + 1

    def session_started(self) -> None:
        with self._lock:
            self.sessions += 1

    def session_ended(self) -> None:
        with self._lock:
            self.sessions -= 1

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "sessions": self.sessions,
                "fired": self.fired,
                "dropped": dict(self.dropped),
                "window": self.window,
                "latency_ms": {
                    "comm": latency_stats(list(self._comm)),
                    "localization": latency_stats(list(self._loc)),
                    "total": latency_stats(list(self._total)),
                },
            }


def composition_cues(beats: list[tuple[float, int]], lead_ms: float = 500.0) -> list[dict]:
    """Cue schedule: each cue fires `lead_ms` ahead of its beat."""
    cues = [
        {
            "type": "cue",
            "beat": i,
            "drum": drum,
            "t_beat_s": beat_s,
            "t_cue_s": max(beat_s - lead_ms / 1000.0, 0.0),
        }
        for i, (beat_s, drum) in enumerate(beats)
    ]
    cues.sort(key=lambda c: (c["t_cue_s"], c["beat"]))
    return cues


class LiveSession:
    def __init__(
        self,
        cfg: PipelineConfig,
        seed: Optional[int] = None,
        collector: Optional[MetricsCollector] = None,
    ):
        self.cfg = cfg
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1)[0])
        self.seed = seed
        self.channel = Channel(
            model=cfg.latency, seed=np.random.SeedSequence(entropy=seed, spawn_key=(10,))
        )
        self._loc_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(11,))
        )
        self.localizer = replace(
            cfg.localizer, noise_sigma_m=0.0, outlier_rate=0.0, failure_rate=0.0
        )
        self.cache = PositionCache()
        self.collector = collector
        self.last_tap_t: Optional[int] = None
        self.last_pos: Optional[tuple[float, float]] = None
        self.seq = 0
        self.taps_seen = 0

    def _drop(self, reason: str, t: int) -> dict:
        if self.collector is not None:
            self.collector.record_drop(reason)
        return {"type": "dropped", "reason": reason, "t": t}

    def handle_tap(self, msg: PointerTapMessage) -> dict:
        """Map one pointer tap to exactly one fired or dropped response."""
        self.taps_seen += 1
        cfg = self.cfg
        floor = abs(cfg.detector.threshold)
        span = cfg.max_intensity_g - floor
        intensity = floor + max(msg.pressure, 1e-6) * span

        debounce_us = cfg.detector.debounce_ms * 1000.0
        if self.last_tap_t is not None and msg.t - self.last_tap_t < debounce_us:
            return self._drop(DROP_DEBOUNCE, msg.t)
        self.last_tap_t = msg.t

        moved = (
            self.last_pos is None
            or math.dist((msg.x, msg.y), self.last_pos) > MOVE_EPSILON_M
        )
        self.last_pos = (msg.x, msg.y)

        level = discretize(intensity, cfg.binning)
        tap = TapEvent(
            t=msg.t, intensity=intensity, level=level, movement_flag=moved, seq=self.seq
        )
        self.seq += 1

        delivery = self.channel.send(
            encode_tap(
                TapMessage(
                    seq=tap.seq & 0xFFFF,
                    t=tap.t,
                    intensity=tap.intensity,
                    level=tap.level,
                    movement_flag=tap.movement_flag,
                )
            ),
            msg.t,
        )
        truth = HandObservation(t=msg.t, x=msg.x, y=msg.y, z=cfg.profile.surface_depth_m)
        resolved = resolve_position(
            tap,
            self.cache,
            self.localizer,
            truth,
            self._loc_rng,
            force_localize=cfg.policy == POLICY_CONTINUOUS,
        )
        if resolved is None:
            return self._drop(DROP_NO_HAND, msg.t)
        (x, y, z), loc_ms = resolved
        if not depth_gate(z, cfg.profile.surface_depth_m, cfg.depth_tol_m):
            return self._drop(DROP_DEPTH_GATE, msg.t)
        drum = hit_test((x, y), cfg.layout)
        if drum is None:
            return self._drop(DROP_OUT_OF_BOUNDS, msg.t)
        self.cache.last_drum = drum

        latency = LatencyBreakdown.of(delivery.comm_ms, loc_ms)
        if self.collector is not None:
            self.collector.record_fired(latency)
        return {
            "type": "fired",
            "t": msg.t,
            "seq": tap.seq,
            "drum": drum,
            "level": level,
            "amplitude": amplitude_for(level, cfg.num_levels),
            "pan": list(pan_for(x, cfg.layout.surface_w)),
            "latency": {
                "comm_ms": latency.comm_ms,
                "localization_ms": latency.localization_ms,
                "total_ms": latency.total_ms,
            },
            "t_fire": msg.t + int(round(latency.total_ms * 1000.0)),
        }

    def handle_move(self, msg: HandMoveMessage) -> None:
        """Pointer travel without a strike still counts as planar movement."""
        if self.last_pos is not None and math.dist((msg.x, msg.y), self.last_pos) > MOVE_EPSILON_M:
            self.last_pos = (msg.x, msg.y)

    def handle_calibrate(self, msg: CalibrateMessage) -> dict:
        streams = [
            [ImuSample(t=s.t, ax=s.ax, ay=s.ay, az=s.az) for s in stream]
            for stream in msg.streams
        ]
        try:
            threshold = calibrate_threshold(streams, safety=msg.safety)
            self.cfg = self.cfg.with_threshold(threshold)
        except MutableError as exc:
            return {"type": "error", "message": str(exc)}
        return {
            "type": "calibrated",
            "threshold": threshold,
            "bin_edges": list(self.cfg.profile.bin_edges),
        }

    def composition_schedule(self, msg: CompositionMessage) -> list[dict]:
        known = {d.id for d in self.cfg.layout.drums}
        for beat_s, drum in msg.beats:
            if drum not in known:
                raise MutableError(f"composition names unknown drum {drum}")
        return composition_cues(msg.beats, msg.lead_ms)
