"""Command-line client.

All batch commands go through the service's HTTP interface: against a
remote server when --server is given, otherwise against an in-process
instance of the same app, so the CLI works with or without a running
daemon and always exercises the one public surface.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .config import PipelineConfig
from .instrument import SoundTrigger, mix_triggers, write_wav


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=120.0)
    import warnings

    with warnings.catch_warnings():
        # The in-process ASGI client pulls in starlette.testclient, which
        # warns about its httpx dependency; irrelevant noise for CLI use.
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _check(resp: httpx.Response) -> dict:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"server error ({resp.status_code}): {detail}")
    return resp.json()


@click.group()
@click.version_option(__version__)
def main():
    """Virtual drum surface toolkit."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(host: str, port: int, config_path: str | None):
    """Run the play service (HTTP + websocket)."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(config_path=config_path), host=host, port=port)


@main.command("gen-trace")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--layout", "layout_path", type=click.Path(exists=True), default=None)
@click.option("--server", default=None, help="Remote service URL; in-process by default.")
def gen_trace(spec_path: str, out_path: str, layout_path: str | None, server: str | None):
    """Render a scenario spec into a JSONL trace."""
    body: dict = {"spec": json.loads(Path(spec_path).read_text())}
    if layout_path:
        body["layout"] = json.loads(Path(layout_path).read_text())
    with _client(server) as client:
        data = _check(client.post("/traces/generate", json=body))
    Path(out_path).write_text(data["trace"])
    click.echo(f"wrote {data['records']} records ({data['labels']} labels) to {out_path}")


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--wav", "wav_path", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--server", default=None)
def replay(
    trace_path: str,
    config_path: str | None,
    report_path: str,
    wav_path: str | None,
    csv_path: str | None,
    seed: int,
    server: str | None,
):
    """Replay a trace through the pipeline and write the run report."""
    body: dict = {"trace": Path(trace_path).read_text(), "seed": seed}
    cfg = PipelineConfig.load(config_path) if config_path else PipelineConfig()
    if config_path:
        body["config"] = cfg.to_dict()
    with _client(server) as client:
        report = _check(client.post("/replay", json=body))
    Path(report_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if wav_path:
        triggers = [
            SoundTrigger(
                drum_id=h["drum"],
                amplitude=h["amplitude"],
                pan=(h["pan"][0], h["pan"][1]),
                t_fire=h["t_fire"],
            )
            for h in report["hits"]
        ]
        write_wav(wav_path, mix_triggers(triggers, cfg.layout))
    if csv_path:
        lines = ["seq,t_us,drum,level,comm_ms,localization_ms,total_ms"]
        lines += [
            f"{h['seq']},{h['t']},{h['drum']},{h['level']},"
            f"{h['comm_ms']},{h['localization_ms']},{h['total_ms']}"
            for h in report["hits"]
        ]
        Path(csv_path).write_text("\n".join(lines) + "\n")
    c = report["counts"]
    lat = report["latency_ms"]["total_ms"]
    click.echo(
        f"{c['detections']} detections, {c['hits']} hits, {c['drops']} drops; "
        f"mean total {lat['mean']:.1f} ms"
    )


@main.command()
@click.option(
    "--training",
    "training_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Directory of JSONL streams, one deliberate tap each.",
)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--safety", default=0.6, show_default=True, type=float)
@click.option("--server", default=None)
def calibrate(training_dir: str, out_path: str, safety: float, server: str | None):
    """Learn a calibration profile from training tap recordings."""
    from .traceio import read_trace
    from .types import ImuSample

    streams = []
    for path in sorted(Path(training_dir).glob("*.jsonl")):
        samples = [r for r in read_trace(path) if isinstance(r, ImuSample)]
        if samples:
            streams.append(
                [{"t": s.t, "ax": s.ax, "ay": s.ay, "az": s.az} for s in samples]
            )
    if not streams:
        raise click.ClickException(f"no IMU streams found under {training_dir}")
    with _client(server) as client:
        profile = _check(client.post("/calibrate", json={"streams": streams, "safety": safety}))
    Path(out_path).write_text(json.dumps(profile, indent=2, sort_keys=True) + "\n")
    click.echo(f"threshold {profile['tap_threshold']:.3f} g from {len(streams)} streams -> {out_path}")


@main.command()
@click.option(
    "--policy",
    type=click.Choice(["continuous", "adaptive"]),
    default="adaptive",
    show_default=True,
)
@click.option("--payload", type=click.Choice(["24", "62"]), default="24", show_default=True)
@click.option("--taps", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--server", default=None)
def bench(policy: str, payload: str, taps: int, seed: int, server: str | None):
    """Latency benchmark: repeated same-spot taps under the chosen policy."""
    body = {"policy": policy, "payload": int(payload), "taps": taps, "seed": seed}
    with _client(server) as client:
        data = _check(client.post("/bench", json=body))
    click.echo(f"policy={data['policy']} payload={data['payload']}B taps={data['taps']}")
    for stage in ("comm_ms", "localization_ms", "total_ms"):
        s = data["latency_ms"][stage]
        click.echo(
            f"  {stage:<16} mean {s['mean']:7.2f}  p50 {s['p50']:7.2f}  "
            f"p95 {s['p95']:7.2f}  p99 {s['p99']:7.2f}"
        )


if __name__ == "__main__":
    sys.exit(main())
