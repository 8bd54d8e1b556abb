from .app import create_app
from .session import LiveSession, MetricsCollector, composition_cues

__all__ = ["create_app", "LiveSession", "MetricsCollector", "composition_cues"]
