"""Band-to-server wire formats and the channel latency model.

Two payload formats are supported: a 24-byte binary tap event and a
62-byte fixed-width text frame carrying raw acceleration. Channel latency
is drawn from a log-normal distribution whose mean depends on payload
size; deliveries stay in send order like real notification streams.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EncodingOverflowError, InvalidConfigError, InvalidInputError

TAP_MESSAGE_SIZE = 24
RAW_MESSAGE_SIZE = 62

WIRE_VERSION = 1
MSG_TYPE_TAP = 0x01

# Little-endian: version, type, seq, t_us, intensity, level, flag, padding.
_TAP_STRUCT = struct.Struct("<BBHQfBB6x")

DEFAULT_MEAN_24B_MS = 100.3
DEFAULT_MEAN_62B_MS = 110.87
# Log-normal shape parameter; keeps the 5th-95th percentile band at
# roughly +/-20 ms around the mean.
DEFAULT_COMM_SIGMA = 0.121


@dataclass(frozen=True)
class TapMessage:
    seq: int
    t: int  # microseconds
    intensity: float  # g, stored as float32 on the wire
    level: int
    movement_flag: bool
    version: int = WIRE_VERSION


@dataclass(frozen=True)
class RawAccelMessage:
    t: int
    ax: float
    ay: float
    az: float


def encode_tap(msg: TapMessage) -> bytes:
    if not 0 <= msg.seq <= 0xFFFF:
        raise InvalidInputError(f"seq {msg.seq} outside 16-bit range")
    if not 0 <= msg.level <= 0xFF:
        raise InvalidInputError(f"level {msg.level} outside byte range")
    if msg.t < 0:
        raise InvalidInputError(f"timestamp must be non-negative, got {msg.t}")
    return _TAP_STRUCT.pack(
        msg.version,
        MSG_TYPE_TAP,
        msg.seq,
        msg.t,
        msg.intensity,
        msg.level,
        1 if msg.movement_flag else 0,
    )


def decode_tap(buf: bytes) -> TapMessage:
    if len(buf) != TAP_MESSAGE_SIZE:
        raise InvalidInputError(f"tap frame must be {TAP_MESSAGE_SIZE} bytes, got {len(buf)}")
    version, msg_type, seq, t, intensity, level, flag = _TAP_STRUCT.unpack(buf)
    if msg_type != MSG_TYPE_TAP:
        raise InvalidInputError(f"unexpected message type {msg_type:#x}")
    return TapMessage(
        seq=seq, t=t, intensity=intensity, level=level, movement_flag=bool(flag), version=version
    )


def encode_raw(msg: RawAccelMessage) -> bytes:
    for name in ("ax", "ay", "az"):
        if abs(getattr(msg, name)) >= 100.0:
            raise EncodingOverflowError(f"{name} out of +/-100 g text range")
    text = f"A,{msg.t},{msg.ax:.4f},{msg.ay:.4f},{msg.az:.4f}"
    if len(text) > RAW_MESSAGE_SIZE:
        raise EncodingOverflowError(f"frame is {len(text)} bytes, limit {RAW_MESSAGE_SIZE}")
    return text.ljust(RAW_MESSAGE_SIZE).encode("ascii")


def decode_raw(buf: bytes) -> RawAccelMessage:
    if len(buf) != RAW_MESSAGE_SIZE:
        raise InvalidInputError(f"raw frame must be {RAW_MESSAGE_SIZE} bytes, got {len(buf)}")
    parts = buf.decode("ascii").rstrip(" ").split(",")
    if len(parts) != 5 or parts[0] != "A":
        raise InvalidInputError("malformed raw acceleration frame")
    return RawAccelMessage(
        t=int(parts[1]), ax=float(parts[2]), ay=float(parts[3]), az=float(parts[4])
    )


@dataclass
class LatencyModel:
    """Log-normal channel latency keyed by payload size.

    Means for sizes between the two measured anchors are interpolated
    linearly; the shape parameter is shared.
    """

    mean_24b_ms: float = DEFAULT_MEAN_24B_MS
    mean_62b_ms: float = DEFAULT_MEAN_62B_MS
    sigma: float = DEFAULT_COMM_SIGMA
    drop_rate: float = 0.0

    def __post_init__(self):
        if self.mean_24b_ms <= 0 or self.mean_62b_ms <= 0 or self.sigma <= 0:
            raise InvalidConfigError("latency model parameters must be positive")

    def mean_for(self, payload_size: int) -> float:
        slope = (self.mean_62b_ms - self.mean_24b_ms) / (RAW_MESSAGE_SIZE - TAP_MESSAGE_SIZE)
        return self.mean_24b_ms + slope * (payload_size - TAP_MESSAGE_SIZE)

    def sample_ms(self, payload_size: int, rng: np.random.Generator) -> float:
        mean = self.mean_for(payload_size)
        mu = math.log(mean) - 0.5 * self.sigma * self.sigma
        return float(rng.lognormal(mu, self.sigma))


@dataclass(frozen=True)
class Delivery:
    send_t: int  # microseconds
    deliver_t: int
    comm_ms: float
    dropped: bool = False


@dataclass
class Channel:
    """One ordered band-to-server link driven by the simulation clock."""

    model: LatencyModel = field(default_factory=LatencyModel)
    seed: int = 0

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)
        self._last_delivery: Optional[int] = None

    def send(self, payload: bytes, send_t: int) -> Delivery:
        """Queue a payload at send_t; returns its delivery with comm latency.

        Deliveries never reorder: a sample that would overtake the previous
        delivery is held back to preserve FIFO semantics.
        """
        if self.model.drop_rate > 0 and self._rng.random() < self.model.drop_rate:
            return Delivery(send_t=send_t, deliver_t=send_t, comm_ms=0.0, dropped=True)
        latency_ms = self.model.sample_ms(len(payload), self._rng)
        deliver_t = send_t + int(round(latency_ms * 1000.0))
        if self._last_delivery is not None and deliver_t < self._last_delivery:
            deliver_t = self._last_delivery
        self._last_delivery = deliver_t
        return Delivery(
            send_t=send_t, deliver_t=deliver_t, comm_ms=(deliver_t - send_t) / 1000.0
        )
