"""Session-start auto-calibration.

Three independent steps, all driven by data captured before play begins:
the tap threshold from a few deliberate training taps, the surface depth
from a depth-camera point cloud, and the camera-to-surface homography
from fiducial correspondences.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .detector import jerk
from .errors import (
    DegenerateTrainingError,
    InsufficientCalibrationError,
    InvalidConfigError,
    SingularCalibrationError,
)
from .types import ImuSample

DEFAULT_SAFETY_FACTOR = 0.6
DEFAULT_DEPTH_BIN_M = 0.01
DEFAULT_MIN_MARKERS = 3

Point = tuple[float, float]


@dataclass
class CalibrationProfile:
    """Everything a session learns before the first playable tap."""

    tap_threshold: float  # g, negative
    surface_depth_m: float
    homography: np.ndarray  # 3x3, camera pixels -> surface meters
    marker_confidence: int
    bin_edges: list[float]

    def __post_init__(self):
        self.homography = np.asarray(self.homography, dtype=float).reshape(3, 3)
        if self.surface_depth_m <= 0:
            raise InvalidConfigError(f"surface depth must be > 0, got {self.surface_depth_m}")
        if abs(np.linalg.det(self.homography)) < 1e-12:
            raise InvalidConfigError("homography is not invertible")
        if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise InvalidConfigError(f"bin edges not strictly ascending: {self.bin_edges}")

    def to_dict(self) -> dict:
        return {
            "tap_threshold": self.tap_threshold,
            "surface_depth_m": self.surface_depth_m,
            "homography": [float(v) for v in self.homography.reshape(-1)],
            "marker_confidence": self.marker_confidence,
            "bin_edges": list(self.bin_edges),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CalibrationProfile":
        return cls(
            tap_threshold=float(obj["tap_threshold"]),
            surface_depth_m=float(obj["surface_depth_m"]),
            homography=np.asarray(obj["homography"], dtype=float).reshape(3, 3),
            marker_confidence=int(obj["marker_confidence"]),
            bin_edges=[float(v) for v in obj["bin_edges"]],
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CalibrationProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class DepthPointCloud:
    depths: tuple[float, ...]

    def __post_init__(self):
        if any(d <= 0 for d in self.depths):
            raise InvalidConfigError("all point depths must be > 0")


def calibrate_threshold(
    training_taps: Sequence[Iterable[ImuSample]],
    safety: float = DEFAULT_SAFETY_FACTOR,
) -> float:
    """Learn the detection threshold from single-tap training streams.

    Each stream must contain exactly one deliberate tap. The threshold is
    minus `safety` times the median of the per-stream peak negative-jerk
    magnitudes, so taps at least `safety` as strong as the training taps
    will trigger.
    """
    if not 0 < safety <= 1:
        raise InvalidConfigError(f"safety factor must be in (0, 1], got {safety}")
    streams = [list(s) for s in training_taps]
    if len(streams) < 3:
        raise InsufficientCalibrationError(
            f"need at least 3 training streams, got {len(streams)}"
        )
    peaks = []
    for k, stream in enumerate(streams):
        dips = [
            -jerk(prev, curr).jz
            for prev, curr in zip(stream, stream[1:])
            if curr.az < prev.az
        ]
        if not dips:
            raise DegenerateTrainingError(f"training stream {k} has no negative jerk")
        peaks.append(max(dips))
    return -safety * statistics.median(peaks)


def calibrate_surface_depth(
    cloud: DepthPointCloud, bin_width_m: float = DEFAULT_DEPTH_BIN_M
) -> float:
    """Estimate the surface depth as the mode of the point-cloud depth histogram.

    Bins are centered on multiples of bin_width_m. Count ties break toward
    the larger depth: the surface is the farthest dominant plane, anything
    nearer is a hand or arm in view.
    """
    if not cloud.depths:
        raise InsufficientCalibrationError("empty point cloud")
    counts: dict[int, int] = {}
    for d in cloud.depths:
        idx = int(round(d / bin_width_m))
        counts[idx] = counts.get(idx, 0) + 1
    best = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return best[0] * bin_width_m


def calibrate_projection(
    correspondences: Sequence[tuple[Point, Point]],
    detected_markers: int,
    min_markers: int = DEFAULT_MIN_MARKERS,
) -> Optional[tuple[np.ndarray, int]]:
    """Fit the pixel-to-surface homography from fiducial correspondences.

    Returns None (not ready) when fewer than min_markers fiducials were
    detected; the instrument must not be projected in that case. Otherwise
    solves the direct linear transform in least squares over all pairs and
    normalizes the bottom-right entry to 1.
    """
    if detected_markers < min_markers:
        return None
    if len(correspondences) < 4:
        raise SingularCalibrationError(
            f"need at least 4 correspondences, got {len(correspondences)}"
        )
    rows = []
    for (u, v), (x, y) in correspondences:
        rows.append([u, v, 1, 0, 0, 0, -x * u, -x * v, -x])
        rows.append([0, 0, 0, u, v, 1, -y * u, -y * v, -y])
    a = np.asarray(rows, dtype=float)
    _, sv, vt = np.linalg.svd(a)
    # Rank < 8 means the correspondences do not pin down a projective map.
    if sv[7] < 1e-10 * sv[0]:
        raise SingularCalibrationError("correspondences are collinear or degenerate")
    h = vt[-1].reshape(3, 3)
    if abs(h[2, 2]) < 1e-12:
        raise SingularCalibrationError("homography normalization failed (h33 ~ 0)")
    return h / h[2, 2], detected_markers


def apply_homography(h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Map (n, 2) points through a 3x3 projective transform."""
    pts = np.asarray(points, dtype=float)
    ones = np.ones((pts.shape[0], 1))
    proj = np.hstack([pts, ones]) @ np.asarray(h, dtype=float).T
    return proj[:, :2] / proj[:, 2:3]
