"""Instrument geometry and sound synthesis.

The projected instrument is a set of circular drum pads on a rectangular
surface. A resolved tap is hit-tested against the discs, mapped to an
amplitude proportional to its intensity level, panned by its horizontal
position, and rendered as a damped-modal drum tone.
"""

from __future__ import annotations

import json
import math
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidConfigError

DEFAULT_SAMPLE_RATE = 44100
DEFAULT_TONE_SECONDS = 0.5

# Circular-membrane overtone ratios and per-partial decay rates (1/s).
MODE_RATIOS = (1.0, 1.59, 2.14)
MODE_DECAYS = (8.0, 12.0, 16.0)
# Relative partial weights; they sum to 1 so the rendered peak never
# exceeds the requested amplitude.
MODE_WEIGHTS = (0.5, 0.3, 0.2)


@dataclass(frozen=True)
class Drum:
    id: int
    center: tuple[float, float]  # meters
    radius: float
    fundamental_hz: float


@dataclass(frozen=True)
class DrumLayout:
    drums: tuple[Drum, ...]
    surface_w: float
    surface_h: float

    def __post_init__(self):
        ids = [d.id for d in self.drums]
        if len(set(ids)) != len(ids):
            raise InvalidConfigError(f"duplicate drum ids: {ids}")
        for d in self.drums:
            if d.radius <= 0:
                raise InvalidConfigError(f"drum {d.id} radius must be > 0")
            x, y = d.center
            if (
                x - d.radius < 0
                or x + d.radius > self.surface_w
                or y - d.radius < 0
                or y + d.radius > self.surface_h
            ):
                raise InvalidConfigError(f"drum {d.id} extends outside the surface")

    def drum(self, drum_id: int) -> Drum:
        for d in self.drums:
            if d.id == drum_id:
                return d
        raise KeyError(f"no drum with id {drum_id}")

    def to_dict(self) -> dict:
        return {
            "surface": {"width": self.surface_w, "height": self.surface_h},
            "drums": [
                {
                    "id": d.id,
                    "center": [d.center[0], d.center[1]],
                    "radius": d.radius,
                    "fundamental_hz": d.fundamental_hz,
                }
                for d in self.drums
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DrumLayout":
        return cls(
            drums=tuple(
                Drum(
                    id=int(d["id"]),
                    center=(float(d["center"][0]), float(d["center"][1])),
                    radius=float(d["radius"]),
                    fundamental_hz=float(d["fundamental_hz"]),
                )
                for d in obj["drums"]
            ),
            surface_w=float(obj["surface"]["width"]),
            surface_h=float(obj["surface"]["height"]),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DrumLayout":
        return cls.from_dict(json.loads(Path(path).read_text()))


def default_layout() -> DrumLayout:
    """Three conga pads spread across a 1.2 m x 0.8 m projection."""
    return DrumLayout(
        drums=(
            Drum(id=1, center=(0.3, 0.4), radius=0.14, fundamental_hz=190.0),
            Drum(id=2, center=(0.6, 0.4), radius=0.14, fundamental_hz=220.0),
            Drum(id=3, center=(0.9, 0.4), radius=0.14, fundamental_hz=250.0),
        ),
        surface_w=1.2,
        surface_h=0.8,
    )


@dataclass(frozen=True)
class SoundTrigger:
    drum_id: int
    amplitude: float  # (0, 1]
    pan: tuple[float, float]  # equal-power left/right gains
    t_fire: int  # microseconds


def hit_test(position: tuple[float, float], layout: DrumLayout) -> Optional[int]:
    """Id of the disc containing the point (boundary inclusive), else None."""
    x, y = position
    for d in layout.drums:
        dx, dy = x - d.center[0], y - d.center[1]
        if dx * dx + dy * dy <= d.radius * d.radius:
            return d.id
    return None


def amplitude_for(level: int, num_levels: int) -> float:
    """Linear map from an intensity level to sound amplitude."""
    if not 1 <= level <= num_levels:
        raise InvalidConfigError(f"level {level} outside 1..{num_levels}")
    return level / num_levels


def pan_for(position_x: float, surface_width: float) -> tuple[float, float]:
    """Equal-power stereo gains from the horizontal hit position."""
    frac = min(max(position_x / surface_width, 0.0), 1.0)
    theta = frac * math.pi / 2.0
    return math.cos(theta), math.sin(theta)


def synthesize(
    trigger: SoundTrigger,
    layout: DrumLayout,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    duration: float = DEFAULT_TONE_SECONDS,
) -> np.ndarray:
    """Render one damped-modal drum tone as a float (n, 2) stereo buffer.

    The tone is a weighted sum of exponentially decaying sinusoids at the
    drum's fundamental and its overtone ratios; peak magnitude never
    exceeds the trigger amplitude.
    """
    drum = layout.drum(trigger.drum_id)
    n = int(round(sample_rate * duration))
    t = np.arange(n) / sample_rate
    mono = np.zeros(n)
    for ratio, decay, weight in zip(MODE_RATIOS, MODE_DECAYS, MODE_WEIGHTS):
        mono += weight * np.exp(-decay * t) * np.sin(2.0 * math.pi * drum.fundamental_hz * ratio * t)
    mono *= trigger.amplitude
    left, right = trigger.pan
    return np.stack([mono * left, mono * right], axis=1)


def mix_triggers(
    triggers: list[SoundTrigger],
    layout: DrumLayout,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    tone_seconds: float = DEFAULT_TONE_SECONDS,
) -> np.ndarray:
    """Lay every trigger's tone onto a shared stereo timeline (t_fire offsets)."""
    if not triggers:
        return np.zeros((0, 2))
    t0 = min(tr.t_fire for tr in triggers)
    end = max(tr.t_fire for tr in triggers) - t0
    total = int(round(end * 1e-6 * sample_rate)) + int(round(tone_seconds * sample_rate))
    out = np.zeros((total, 2))
    for tr in triggers:
        start = int(round((tr.t_fire - t0) * 1e-6 * sample_rate))
        tone = synthesize(tr, layout, sample_rate, tone_seconds)
        out[start : start + len(tone)] += tone
    peak = np.max(np.abs(out)) if len(out) else 0.0
    if peak > 1.0:
        out /= peak * 1.01  # headroom against clipping when tones overlap
    return out


def write_wav(path: Union[str, Path], stereo: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> None:
    """Write a float stereo buffer as 16-bit little-endian PCM."""
    pcm = np.clip(stereo, -1.0, 1.0)
    samples = (pcm * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(2)
        f.setsampwidth(2)
        f.setframerate(sample_rate)
        f.writeframes(samples.tobytes())
