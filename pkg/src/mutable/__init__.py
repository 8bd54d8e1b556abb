"""Virtual drum surface: tap detection, adaptive localization, latency
simulation, sound synthesis, and a live play service."""

__version__ = "0.1.0"

from .config import PipelineConfig, default_profile
from .detector import Detector, DetectorConfig, detect_all
from .instrument import DrumLayout, default_layout
from .pipeline import RunReport, evaluate, run
from .scenarios import ScenarioSpec, generate, replay
from .types import HandObservation, HitEvent, ImuSample, Label, TapEvent

__all__ = [
    "PipelineConfig",
    "default_profile",
    "Detector",
    "DetectorConfig",
    "detect_all",
    "DrumLayout",
    "default_layout",
    "RunReport",
    "evaluate",
    "run",
    "ScenarioSpec",
    "generate",
    "replay",
    "HandObservation",
    "HitEvent",
    "ImuSample",
    "Label",
    "TapEvent",
    "__version__",
]
