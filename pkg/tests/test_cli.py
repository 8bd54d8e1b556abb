import json

from click.testing import CliRunner

from mutable.cli import main
from mutable.scenarios import hard_tap_scenario, save_spec
from mutable.traceio import write_trace
from mutable.types import ImuSample


def invoke(*args):
    runner = CliRunner()
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_gen_trace_and_replay_round_trip(tmp_path):
    spec_path = tmp_path / "spec.json"
    save_spec(hard_tap_scenario(n=5), spec_path)
    trace_path = tmp_path / "trace.jsonl"
    invoke("gen-trace", "--spec", str(spec_path), "--out", str(trace_path))
    assert trace_path.exists()

    from mutable.config import PipelineConfig

    cfg_path = tmp_path / "cfg.json"
    PipelineConfig(policy="adaptive").save(cfg_path)
    report_path = tmp_path / "report.json"
    wav_path = tmp_path / "out.wav"
    csv_path = tmp_path / "latency.csv"
    result = invoke(
        "replay",
        "--trace", str(trace_path),
        "--config", str(cfg_path),
        "--report", str(report_path),
        "--wav", str(wav_path),
        "--csv", str(csv_path),
        "--seed", "3",
    )
    assert "5 detections, 5 hits" in result.output
    report = json.loads(report_path.read_text())
    assert report["detection"]["recall"] == 1.0
    assert wav_path.read_bytes()[:4] == b"RIFF"
    assert len(csv_path.read_text().splitlines()) == 6


def test_calibrate_from_training_directory(tmp_path):
    training = tmp_path / "training"
    training.mkdir()
    for k, peak in enumerate([1.0, 1.0, 1.0]):
        stream = [
            ImuSample(t=i * 9615, ax=0.0, ay=0.0, az=1.0 if i != 30 else 1.0 - peak)
            for i in range(60)
        ]
        write_trace(training / f"tap{k}.jsonl", stream)
    profile_path = tmp_path / "profile.json"
    result = invoke(
        "calibrate", "--training", str(training), "--out", str(profile_path), "--safety", "0.5"
    )
    assert "-0.500" in result.output
    profile = json.loads(profile_path.read_text())
    assert profile["tap_threshold"] == -0.5
    assert len(profile["bin_edges"]) == 3


def test_bench_prints_stage_table(tmp_path):
    result = invoke("bench", "--policy", "adaptive", "--payload", "24", "--taps", "25")
    assert "comm_ms" in result.output
    assert "total_ms" in result.output
