"""Request/response models for the play socket and the REST endpoints."""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter


class ImuSampleModel(BaseModel):
    t: int
    ax: float
    ay: float
    az: float


# Client -> server session messages (JSON over the /play socket).

class HelloMessage(BaseModel):
    type: Literal["hello"] = "hello"
    client: str = ""


class PointerTapMessage(BaseModel):
    type: Literal["tap"] = "tap"
    t: int  # client-monotone microseconds
    x: float
    y: float
    pressure: float = Field(default=1.0, ge=0.0, le=1.0)


class HandMoveMessage(BaseModel):
    type: Literal["move"] = "move"
    t: int
    x: float
    y: float


class CalibrateMessage(BaseModel):
    type: Literal["calibrate"] = "calibrate"
    streams: list[list[ImuSampleModel]]
    safety: float = Field(default=0.6, gt=0.0, le=1.0)


class CompositionMessage(BaseModel):
    type: Literal["composition"] = "composition"
    beats: list[tuple[float, int]]  # (beat time in seconds, drum id)
    lead_ms: float = 500.0


SessionMessage = Annotated[
    Union[HelloMessage, PointerTapMessage, HandMoveMessage, CalibrateMessage, CompositionMessage],
    Field(discriminator="type"),
]

session_message_adapter: TypeAdapter = TypeAdapter(SessionMessage)


# REST bodies for the batch endpoints (the CLI is a thin client of these).

class GenerateRequest(BaseModel):
    spec: dict
    layout: Optional[dict] = None


class GenerateResponse(BaseModel):
    trace: str
    records: int
    labels: int


class ReplayRequest(BaseModel):
    trace: str
    config: Optional[dict] = None
    seed: int = 0


class CalibrateRequest(BaseModel):
    streams: list[list[ImuSampleModel]]
    safety: float = Field(default=0.6, gt=0.0, le=1.0)
    depths: Optional[list[float]] = None
    depth_bin_m: float = 0.01
    correspondences: Optional[list[tuple[tuple[float, float], tuple[float, float]]]] = None
    detected_markers: int = 4
    min_markers: int = 3


class BenchRequest(BaseModel):
    policy: Literal["continuous", "adaptive"] = "adaptive"
    payload: Literal[24, 62] = 24
    taps: int = Field(default=200, ge=1, le=20000)
    spacing_s: float = Field(default=0.6, gt=0.0)
    seed: int = 0
