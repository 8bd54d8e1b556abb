"""Trace file I/O.

A trace is UTF-8 JSONL, one record per line, sorted by timestamp:

    {"type":"imu","t":<int us>,"ax":<num>,"ay":<num>,"az":<num>}
    {"type":"hand","t":<int us>,"x":<num>,"y":<num>,"z":<num>,"conf":<num>}
    {"type":"label","t":<int us>,"tap":<bool>,"soft":<bool>,"drum":<int|null>}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Union

from .errors import TraceParseError
from .types import HandObservation, ImuSample, Label, TraceRecord


def record_to_dict(rec: TraceRecord) -> dict:
    if isinstance(rec, ImuSample):
        return {"type": "imu", "t": rec.t, "ax": rec.ax, "ay": rec.ay, "az": rec.az}
    if isinstance(rec, HandObservation):
        return {
            "type": "hand",
            "t": rec.t,
            "x": rec.x,
            "y": rec.y,
            "z": rec.z,
            "conf": rec.confidence,
        }
    if isinstance(rec, Label):
        return {
            "type": "label",
            "t": rec.t,
            "tap": rec.is_tap,
            "soft": rec.is_soft,
            "drum": rec.drum_id,
        }
    raise TypeError(f"not a trace record: {rec!r}")


def record_from_dict(obj: dict) -> TraceRecord:
    kind = obj.get("type")
    if kind == "imu":
        return ImuSample(t=int(obj["t"]), ax=float(obj["ax"]), ay=float(obj["ay"]), az=float(obj["az"]))
    if kind == "hand":
        return HandObservation(
            t=int(obj["t"]),
            x=float(obj["x"]),
            y=float(obj["y"]),
            z=float(obj["z"]),
            confidence=float(obj.get("conf", 1.0)),
        )
    if kind == "label":
        drum = obj.get("drum")
        return Label(
            t=int(obj["t"]),
            is_tap=bool(obj["tap"]),
            is_soft=bool(obj["soft"]),
            drum_id=None if drum is None else int(drum),
        )
    raise ValueError(f"unknown record type: {kind!r}")


def dumps_trace(records: Iterable[TraceRecord]) -> str:
    return "".join(json.dumps(record_to_dict(r), separators=(",", ":")) + "\n" for r in records)


def loads_trace(text: str) -> list[TraceRecord]:
    records: list[TraceRecord] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            records.append(record_from_dict(obj))
        except (ValueError, KeyError, TypeError) as exc:
            raise TraceParseError(lineno, str(exc)) from exc
    return records


def write_trace(path: Union[str, Path], records: Iterable[TraceRecord]) -> None:
    Path(path).write_text(dumps_trace(records), encoding="utf-8")


def read_trace(path: Union[str, Path]) -> list[TraceRecord]:
    return loads_trace(Path(path).read_text(encoding="utf-8"))
