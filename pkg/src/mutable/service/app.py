"""HTTP/WebSocket service exposing the pipeline.

Endpoints:
  GET  /health           liveness probe
  GET  /layout           instrument layout JSON
  GET  /metrics          rolling latency/outcome stats
  WS   /play             live session socket (JSON messages)
  POST /traces/generate  scenario spec -> JSONL trace
  POST /replay           trace + config -> run report
  POST /calibrate        training data -> calibration profile
  POST /bench            standard latency benchmark

Configuration comes from create_app(config_path=...), falling back to the
MUTABLE_CONFIG environment variable, then to built-in defaults.
"""

from __future__ import annotations

import asyncio
import os
import time
from pathlib import Path
from typing import Optional

import numpy as np
import pydantic
from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..calibration import (
    DepthPointCloud,
    calibrate_projection,
    calibrate_surface_depth,
    calibrate_threshold,
)
from ..config import DEFAULT_SURFACE_DEPTH_M, PipelineConfig, default_profile
from ..discretization import make_binning
from ..errors import MutableError
from ..instrument import DrumLayout
from ..pipeline import run
from ..scenarios import ScenarioSpec, generate, same_spot_scenario
from ..traceio import dumps_trace, loads_trace
from ..types import ImuSample, Label
from .schemas import (
    BenchRequest,
    CalibrateRequest,
    GenerateRequest,
    GenerateResponse,
    ReplayRequest,
    session_message_adapter,
)
from .session import LiveSession, MetricsCollector

# Sent over the play socket after every this many fired taps.
METRICS_PUSH_EVERY = 8


def load_config(config_path: Optional[str] = None) -> PipelineConfig:
    path = os.environ.get("MUTABLE_CONFIG") or config_path
    return PipelineConfig.load(path) if path else PipelineConfig()


def _ui_dir() -> Optional[Path]:
    """Locate the built browser surface, if present."""
    override = os.environ.get("MUTABLE_UI_DIR")
    candidates = [Path(override)] if override else []
    candidates.append(Path(__file__).resolve().parents[3] / "frontend")
    for cand in candidates:
        if (cand / "index.html").exists():
            return cand
    return None


def create_app(
    cfg: Optional[PipelineConfig] = None, config_path: Optional[str] = None
) -> FastAPI:
    cfg = cfg or load_config(config_path)
    app = FastAPI(title="mutable", version=__version__)
    app.state.cfg = cfg
    app.state.metrics = MetricsCollector()

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/layout")
    def layout() -> dict:
        return app.state.cfg.layout.to_dict()

    @app.get("/metrics")
    def metrics() -> dict:
        return app.state.metrics.snapshot()

    @app.post("/traces/generate", response_model=GenerateResponse)
    def generate_trace(req: GenerateRequest) -> GenerateResponse:
        try:
            spec = ScenarioSpec.from_dict(req.spec)
            layout_obj = (
                DrumLayout.from_dict(req.layout) if req.layout else app.state.cfg.layout
            )
            records = generate(spec, layout_obj)
        except (MutableError, KeyError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return GenerateResponse(
            trace=dumps_trace(records),
            records=len(records),
            labels=sum(isinstance(r, Label) for r in records),
        )

    @app.post("/replay")
    def replay_trace(req: ReplayRequest) -> dict:
        try:
            run_cfg = (
                PipelineConfig.from_dict(req.config) if req.config else app.state.cfg
            )
            records = loads_trace(req.trace)
            report = run(records, run_cfg, seed=req.seed)
        except MutableError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return report.to_dict()

    @app.post("/calibrate")
    def calibrate(req: CalibrateRequest) -> dict:
        try:
            streams = [
                [ImuSample(t=s.t, ax=s.ax, ay=s.ay, az=s.az) for s in stream]
                for stream in req.streams
            ]
            threshold = calibrate_threshold(streams, safety=req.safety)
            surface_depth = (
                calibrate_surface_depth(DepthPointCloud(tuple(req.depths)), req.depth_bin_m)
                if req.depths
                else DEFAULT_SURFACE_DEPTH_M
            )
            homography = np.eye(3)
            markers = req.detected_markers
            if req.correspondences:
                projection = calibrate_projection(
                    [((u, v), (x, y)) for (u, v), (x, y) in req.correspondences],
                    detected_markers=req.detected_markers,
                    min_markers=req.min_markers,
                )
                if projection is None:
                    raise HTTPException(
                        status_code=409,
                        detail=f"not ready: {req.detected_markers} markers "
                        f"< required {req.min_markers}",
                    )
                homography, markers = projection
            base = app.state.cfg
            binning = make_binning(threshold, base.max_intensity_g, base.num_levels)
            profile = default_profile(threshold, surface_depth)
            profile.homography = homography
            profile.marker_confidence = markers
            profile.bin_edges = list(binning.edges)
            return profile.to_dict()
        except MutableError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/bench")
    def bench(req: BenchRequest) -> dict:
        from dataclasses import replace as dc_replace

        base = app.state.cfg
        bench_cfg = dc_replace(base, policy=req.policy, payload=req.payload)
        records = generate(
            same_spot_scenario(n=req.taps, spacing_s=req.spacing_s, seed=req.seed),
            bench_cfg.layout,
        )
        report = run(records, bench_cfg, seed=req.seed)
        return {
            "policy": req.policy,
            "payload": req.payload,
            "taps": req.taps,
            "hits": len(report.hits),
            "drops": len(report.drops),
            "latency_ms": report.latency,
        }

    @app.websocket("/play")
    async def play(
        ws: WebSocket,
        policy: Optional[str] = Query(default=None),
        seed: Optional[int] = Query(default=None),
    ):
        await ws.accept()
        session_cfg = app.state.cfg
        if policy:
            from dataclasses import replace as dc_replace

            try:
                session_cfg = dc_replace(session_cfg, policy=policy)
            except MutableError as exc:
                await ws.send_json({"type": "error", "message": str(exc)})
                await ws.close()
                return
        session = LiveSession(session_cfg, seed=seed, collector=app.state.metrics)
        app.state.metrics.session_started()
        send_lock = asyncio.Lock()

        async def send(payload: dict) -> None:
            async with send_lock:
                await ws.send_json(payload)

        async def run_composition(cues: list[dict]) -> None:
            start = time.monotonic()
            for cue in cues:
                delay = cue["t_cue_s"] - (time.monotonic() - start)
                if delay > 0:
                    await asyncio.sleep(delay)
                await send(cue)

        composition_task: Optional[asyncio.Task] = None
        await send({"type": "layout", **session_cfg.layout.to_dict()})
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = session_message_adapter.validate_json(raw)
                except pydantic.ValidationError as exc:
                    await send({"type": "error", "message": f"bad message: {exc.errors()[0]['msg']}"})
                    continue
                if msg.type == "hello":
                    await send({"type": "layout", **session.cfg.layout.to_dict()})
                elif msg.type == "tap":
                    await send(session.handle_tap(msg))
                    if session.taps_seen % METRICS_PUSH_EVERY == 0:
                        await send({"type": "metrics", **app.state.metrics.snapshot()})
                elif msg.type == "move":
                    session.handle_move(msg)
                elif msg.type == "calibrate":
                    await send(session.handle_calibrate(msg))
                elif msg.type == "composition":
                    try:
                        cues = session.composition_schedule(msg)
                    except MutableError as exc:
                        await send({"type": "error", "message": str(exc)})
                        continue
                    if composition_task is not None:
                        composition_task.cancel()
                    composition_task = asyncio.create_task(run_composition(cues))
        except WebSocketDisconnect:
            pass
        finally:
            if composition_task is not None:
                composition_task.cancel()
            app.state.metrics.session_ended()

    ui = _ui_dir()
    if ui is not None:
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app


app = create_app()
