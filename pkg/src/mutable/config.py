"""Pipeline configuration: defaults, JSON round-trip, profile wiring.

A config bundles everything one session needs: the detection policy,
detector, intensity binning (via the calibration profile), channel
latency model, simulated localizer, and instrument layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .calibration import CalibrationProfile
from .detector import DetectorConfig
from .discretization import DEFAULT_MAX_INTENSITY_G, Binning, make_binning
from .errors import InvalidConfigError
from .instrument import DrumLayout, default_layout
from .localization import (
    DEFAULT_LATENCY_MEAN_MS,
    DEFAULT_LATENCY_SIGMA,
    DEFAULT_MOVE_THRESHOLD_G,
    DEFAULT_MOVE_WINDOW_SAMPLES,
    LatencyDistribution,
    SimulatedLocalizer,
)
from .transport import LatencyModel

POLICY_CONTINUOUS = "continuous"
POLICY_ADAPTIVE = "adaptive"
POLICIES = (POLICY_CONTINUOUS, POLICY_ADAPTIVE)

DEFAULT_SURFACE_DEPTH_M = 1.5


def default_profile(
    threshold: float = -0.5,
    surface_depth_m: float = DEFAULT_SURFACE_DEPTH_M,
    max_intensity: float = DEFAULT_MAX_INTENSITY_G,
    num_levels: int = 4,
) -> CalibrationProfile:
    """A ready-to-play profile for sessions that skip explicit calibration."""
    binning = make_binning(threshold, max_intensity, num_levels)
    return CalibrationProfile(
        tap_threshold=threshold,
        surface_depth_m=surface_depth_m,
        homography=np.eye(3),
        marker_confidence=4,
        bin_edges=list(binning.edges),
    )


@dataclass
class PipelineConfig:
    policy: str = POLICY_ADAPTIVE
    payload: int = 24  # tap frames on the wire: 24 (binary) or 62 (raw text)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    latency: LatencyModel = field(default_factory=LatencyModel)
    localizer: SimulatedLocalizer = field(default_factory=SimulatedLocalizer)
    layout: DrumLayout = field(default_factory=default_layout)
    profile: CalibrationProfile = field(default_factory=default_profile)
    max_intensity_g: float = DEFAULT_MAX_INTENSITY_G
    depth_tol_m: float = 0.05
    match_window_ms: float = 150.0
    loc_radius_m: float = 0.03
    movement_theta_g: float = DEFAULT_MOVE_THRESHOLD_G
    movement_window: int = DEFAULT_MOVE_WINDOW_SAMPLES

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise InvalidConfigError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.payload not in (24, 62):
            raise InvalidConfigError(f"payload must be 24 or 62 bytes, got {self.payload}")

    @property
    def binning(self) -> Binning:
        edges = tuple(self.profile.bin_edges)
        return Binning(edges=edges, num_levels=len(edges) + 1)

    @property
    def num_levels(self) -> int:
        return len(self.profile.bin_edges) + 1

    def with_threshold(self, threshold: float) -> "PipelineConfig":
        """Rebuild detector, profile, and binning around a calibrated threshold."""
        binning = make_binning(threshold, self.max_intensity_g, self.num_levels)
        profile = CalibrationProfile(
            tap_threshold=threshold,
            surface_depth_m=self.profile.surface_depth_m,
            homography=self.profile.homography,
            marker_confidence=self.profile.marker_confidence,
            bin_edges=list(binning.edges),
        )
        detector = DetectorConfig(
            threshold=threshold,
            debounce_ms=self.detector.debounce_ms,
            sample_rate_hz=self.detector.sample_rate_hz,
        )
        return replace(self, detector=detector, profile=profile)

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "payload": self.payload,
            "detector": {
                "threshold": self.detector.threshold,
                "debounce_ms": self.detector.debounce_ms,
                "sample_rate_hz": self.detector.sample_rate_hz,
            },
            "transport": {
                "mean_24b_ms": self.latency.mean_24b_ms,
                "mean_62b_ms": self.latency.mean_62b_ms,
                "sigma": self.latency.sigma,
                "drop_rate": self.latency.drop_rate,
            },
            "localizer": {
                "noise_sigma_m": self.localizer.noise_sigma_m,
                "outlier_rate": self.localizer.outlier_rate,
                "failure_rate": self.localizer.failure_rate,
                "latency_mean_ms": self.localizer.latency.mean_ms,
                "latency_sigma": self.localizer.latency.sigma,
            },
            "movement": {"theta_g": self.movement_theta_g, "window_samples": self.movement_window},
            "layout": self.layout.to_dict(),
            "profile": self.profile.to_dict(),
            "max_intensity_g": self.max_intensity_g,
            "depth_tol_m": self.depth_tol_m,
            "match_window_ms": self.match_window_ms,
            "loc_radius_m": self.loc_radius_m,
        }

    @classmethod
    def from_dict(cls, obj: Optional[dict]) -> "PipelineConfig":
        obj = obj or {}
        det = obj.get("detector", {})
        tr = obj.get("transport", {})
        loc = obj.get("localizer", {})
        mov = obj.get("movement", {})
        defaults = cls()
        profile = (
            CalibrationProfile.from_dict(obj["profile"]) if "profile" in obj else default_profile()
        )
        return cls(
            policy=obj.get("policy", defaults.policy),
            payload=int(obj.get("payload", defaults.payload)),
            detector=DetectorConfig(
                threshold=float(det.get("threshold", profile.tap_threshold)),
                debounce_ms=float(det.get("debounce_ms", defaults.detector.debounce_ms)),
                sample_rate_hz=float(det.get("sample_rate_hz", defaults.detector.sample_rate_hz)),
            ),
            latency=LatencyModel(
                mean_24b_ms=float(tr.get("mean_24b_ms", defaults.latency.mean_24b_ms)),
                mean_62b_ms=float(tr.get("mean_62b_ms", defaults.latency.mean_62b_ms)),
                sigma=float(tr.get("sigma", defaults.latency.sigma)),
                drop_rate=float(tr.get("drop_rate", defaults.latency.drop_rate)),
            ),
            localizer=SimulatedLocalizer(
                noise_sigma_m=float(loc.get("noise_sigma_m", defaults.localizer.noise_sigma_m)),
                outlier_rate=float(loc.get("outlier_rate", defaults.localizer.outlier_rate)),
                failure_rate=float(loc.get("failure_rate", defaults.localizer.failure_rate)),
                latency=LatencyDistribution(
                    mean_ms=float(loc.get("latency_mean_ms", DEFAULT_LATENCY_MEAN_MS)),
                    sigma=float(loc.get("latency_sigma", DEFAULT_LATENCY_SIGMA)),
                ),
            ),
            layout=DrumLayout.from_dict(obj["layout"]) if "layout" in obj else default_layout(),
            profile=profile,
            max_intensity_g=float(obj.get("max_intensity_g", defaults.max_intensity_g)),
            depth_tol_m=float(obj.get("depth_tol_m", defaults.depth_tol_m)),
            match_window_ms=float(obj.get("match_window_ms", defaults.match_window_ms)),
            loc_radius_m=float(obj.get("loc_radius_m", defaults.loc_radius_m)),
            movement_theta_g=float(mov.get("theta_g", defaults.movement_theta_g)),
            movement_window=int(mov.get("window_samples", defaults.movement_window)),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
