"""Tests for lmcf_lab.cli module."""

import json
import math
from unittest.mock import patch

import pytest

from lmcf_lab import cli
from lmcf_lab.artifacts import RunManifest
from lmcf_lab.cli import (
    AUTO_HORIZON,
    EXIT_CONFIG,
    EXIT_RUNTIME,
    EXIT_VERIFY,
    build_run,
    cmd_blowup,
    main,
    parse_args,
    requested_outputs,
    resolve_horizon,
    worker_count,
)
from lmcf_lab.config import Settings, parse_scenario
from lmcf_lab.errors import ConfigError, ProjectionFailure
from lmcf_lab.invariants import CheckResult, VerifySummary


@pytest.fixture
def home(tmp_path, monkeypatch):
    """Keep the settings file inside tmp_path."""
    config_dir = tmp_path / ".lmcf"
    monkeypatch.setattr("lmcf_lab.config.get_config_dir", lambda: config_dir)
    monkeypatch.setattr("lmcf_lab.config.get_config_file", lambda: config_dir / "config.yaml")
    monkeypatch.delenv("LMCF_THREADS", raising=False)
    return tmp_path


def write_scenario(directory, data, name="scenario.json"):
    path = directory / name
    path.write_text(json.dumps(data))
    return str(path)


ALE = {"model": {"kind": "ale", "n": 1, "alpha": [1.0], "a": 1, "b": 1}, "c0": 2.0}
SHRINKER = {"model": {"kind": "shrinker", "weights": [1, 1]}, "c0": 1.0, "horizon": 0.05,
            "samples": 3, "integrator": {"step": 0.01}}


def test_parse_args_command_and_config():
    """Test parse_args with a command and config file."""
    with patch("sys.argv", ["lmcf", "flow", "-c", "scenario.json"]):
        args = parse_args()
        assert args.command == "flow"
        assert args.config == "scenario.json"
        assert args.out is None
        assert args.seed is None
        assert args.check is False


def test_parse_args_all_flags():
    """Test parse_args with every option."""
    args = parse_args(["verify", "--config", "s.json", "--out", "runs/v", "--seed", "7", "--check"])
    assert args.out == "runs/v"
    assert args.seed == 7
    assert args.check is True


def test_parse_args_requires_config():
    """Test parse_args exits without --config."""
    with pytest.raises(SystemExit):
        parse_args(["flow"])


def test_parse_args_unknown_command():
    """Test parse_args rejects unknown commands."""
    with pytest.raises(SystemExit):
        parse_args(["animate", "-c", "s.json"])


def test_parse_args_version(capsys):
    """Test --version prints the package version."""
    with pytest.raises(SystemExit) as exc_info:
        parse_args(["--version"])
    assert exc_info.value.code == 0
    assert "lmcf 0.1.0" in capsys.readouterr().out


def test_worker_count_from_environment(monkeypatch):
    """Test LMCF_THREADS overrides the settings."""
    monkeypatch.setenv("LMCF_THREADS", "3")
    assert worker_count(Settings({"threads": 8})) == 3


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_worker_count_rejects_bad_environment(monkeypatch, value):
    """Test LMCF_THREADS must be a positive integer."""
    monkeypatch.setenv("LMCF_THREADS", value)
    with pytest.raises(ConfigError) as exc_info:
        worker_count(Settings({}))
    assert exc_info.value.path == "LMCF_THREADS"


def test_worker_count_from_settings(monkeypatch):
    """Test the settings value is used when the variable is unset."""
    monkeypatch.delenv("LMCF_THREADS", raising=False)
    assert worker_count(Settings({"threads": 2})) == 2
    assert worker_count(Settings({})) >= 1


def test_resolve_horizon_auto():
    """Test auto stops just short of the extinction time."""
    run = build_run(parse_scenario({"model": {"kind": "shrinker", "weights": [1, 1]}, "c0": 1.0,
                                    "samples": 2}))
    assert run.singular_time == 0.5
    assert resolve_horizon(run) == pytest.approx(AUTO_HORIZON * 0.5)


def test_resolve_horizon_auto_without_singularity():
    """Test auto is refused for translators."""
    run = build_run(parse_scenario({"model": {"kind": "translator", "weights": [1.0]}, "c0": 1.0,
                                    "samples": 2}))
    assert run.singular_time == math.inf
    with pytest.raises(ConfigError) as exc_info:
        resolve_horizon(run)
    assert exc_info.value.path == "horizon"


def test_build_run_ale():
    """Test ALE runs carry params, the action and sheet tags."""
    run = build_run(parse_scenario(dict(ALE, samples=2, sheets=["++", "--"])))
    assert run.params.n == 1
    assert run.action.a == 1
    assert run.tags == ("++", "++", "--", "--")
    assert run.singular_time == pytest.approx(1.0)
    assert run.a_H == 1.0


def test_requested_outputs():
    """Test the PDF is optional and foreign artifacts are ignored."""
    plain = parse_scenario(dict(ALE, outputs=["trajectory_csv"]))
    assert requested_outputs("polygon", plain) == ["polygon_json", "polygon_plot"]
    with_pdf = parse_scenario(dict(ALE, outputs=["polygon_pdf"]))
    assert requested_outputs("polygon", with_pdf) == ["polygon_json", "polygon_plot", "polygon_pdf"]


def test_cmd_blowup_rejects_static_action(tmp_path):
    """Test a = 0 has no singularity schedule."""
    scenario = parse_scenario({"model": {"kind": "ale", "n": 1, "alpha": [1.0], "a": 0, "b": 1},
                               "c0": 0.5})
    with pytest.raises(ConfigError) as exc_info:
        cmd_blowup(scenario, tmp_path, RunManifest(command="blowup", config={}), 1)
    assert exc_info.value.path == "model.a"


def test_cmd_blowup_rejects_flow_without_singularity(tmp_path):
    """Test a level below every vertex has nothing to blow up."""
    scenario = parse_scenario(dict(ALE, c0=-2.0))
    with pytest.raises(ConfigError) as exc_info:
        cmd_blowup(scenario, tmp_path, RunManifest(command="blowup", config={}), 1)
    assert exc_info.value.path == "c0"


def test_main_polygon_writes_artifacts(home, capsys):
    """Test the polygon command end to end."""
    config = write_scenario(home, dict(ALE, outputs=["polygon_pdf"]))
    out = home / "runs" / "polygon"
    main(["polygon", "-c", config, "-o", str(out)])

    polygon = json.loads((out / "polygon.json").read_text())
    assert polygon["vertices"] == [[1.0, 0.0], [0.0, -1.0]]
    assert (out / "polygon.dat").read_text().startswith("# x y\n1.0 0.0\n0.0 -1.0\n\n")
    assert (out / "polygon.pdf").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"polygon_json", "polygon_plot", "polygon_pdf"}
    assert manifest["command"] == "polygon"
    assert "Done: 3 file(s)" in capsys.readouterr().out


def test_main_check_matches_previous_run(home, capsys):
    """Test --check reruns and compares checksums."""
    config = write_scenario(home, ALE)
    out = home / "runs" / "check"
    main(["polygon", "-c", config, "-o", str(out)])
    main(["polygon", "-c", config, "-o", str(out), "--check"])
    assert "Checksums match" in capsys.readouterr().out


def test_main_check_detects_mismatch(home):
    """Test a changed checksum exits with the verification code."""
    config = write_scenario(home, ALE)
    out = home / "runs" / "tampered"
    main(["polygon", "-c", config, "-o", str(out)])
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["files"]["polygon_json"]["sha256"] = "0" * 64
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(SystemExit) as exc_info:
        main(["polygon", "-c", config, "-o", str(out), "--check"])
    assert exc_info.value.code == EXIT_VERIFY


def test_main_check_without_manifest(home):
    """Test --check needs an earlier run."""
    config = write_scenario(home, ALE)
    with pytest.raises(SystemExit) as exc_info:
        main(["polygon", "-c", config, "-o", str(home / "empty"), "--check"])
    assert exc_info.value.code == EXIT_CONFIG


def test_main_flow_shrinker(home):
    """Test the flow command writes trajectories and the drift summary."""
    config = write_scenario(home, SHRINKER)
    out = home / "runs" / "flow"
    main(["flow", "-c", config, "-o", str(out), "--seed", "5"])
    summary = json.loads((out / "drift_summary.json").read_text())
    assert summary["halt_reason"] == "horizon"
    assert summary["seeds"] == 3
    assert summary["max_drift_residual"] < 1e-8
    assert len((out / "trajectory.jsonl").read_text().splitlines()) == 3 * (summary["steps"] + 1)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 5
    assert "flow" in manifest["timings"] and "total" in manifest["timings"]


def test_main_missing_config_file(home, capsys):
    """Test a missing scenario exits with the config code."""
    with pytest.raises(SystemExit) as exc_info:
        main(["flow", "-c", str(home / "missing.json"), "-o", str(home / "out")])
    assert exc_info.value.code == EXIT_CONFIG
    assert "Error:" in capsys.readouterr().err


def test_main_invalid_scenario_names_field(home, capsys):
    """Test validation errors print the offending field."""
    config = write_scenario(home, {"model": {"kind": "ale", "n": 2, "alpha": [1.0, -1.0], "a": 1, "b": 1},
                                   "c0": 1.0})
    with pytest.raises(SystemExit) as exc_info:
        main(["flow", "-c", config, "-o", str(home / "out")])
    assert exc_info.value.code == EXIT_CONFIG
    assert "model.alpha[1]" in capsys.readouterr().err


def test_main_negative_seed(home):
    """Test --seed must be non-negative."""
    config = write_scenario(home, SHRINKER)
    with pytest.raises(SystemExit) as exc_info:
        main(["flow", "-c", config, "-o", str(home / "out"), "--seed", "-1"])
    assert exc_info.value.code == EXIT_CONFIG


def test_main_polygon_needs_ale_model(home):
    """Test polygon on a flat model is a config error."""
    config = write_scenario(home, SHRINKER)
    with pytest.raises(SystemExit) as exc_info:
        main(["polygon", "-c", config, "-o", str(home / "out")])
    assert exc_info.value.code == EXIT_CONFIG


def test_main_runtime_failure_writes_diagnostics(home, monkeypatch):
    """Test library failures exit 3 with a diagnostics file."""
    def diverge(*args, **kwargs):
        raise ProjectionFailure("Newton projection diverged", step=0.01)

    monkeypatch.setitem(cli.COMMANDS, "flow", diverge)
    config = write_scenario(home, SHRINKER)
    out = home / "runs" / "broken"
    with pytest.raises(SystemExit) as exc_info:
        main(["flow", "-c", config, "-o", str(out)])
    assert exc_info.value.code == EXIT_RUNTIME
    diagnostics = json.loads((out / "diagnostics.json").read_text())
    assert diagnostics["error"] == "ProjectionFailure"
    assert diagnostics["details"] == {"step": 0.01}
    assert diagnostics["command"] == "flow"


def test_main_verify_failure_keeps_tables(home, mocker, capsys):
    """Test failed checks exit 4 after the tables and manifest are written."""
    failing = VerifySummary(results=[
        CheckResult(name="drift_law", passed=False, measured=1.0, threshold=1e-8, tier="integrator"),
    ])
    mocker.patch("lmcf_lab.cli.verify_flat", return_value=failing)
    config = write_scenario(home, SHRINKER)
    out = home / "runs" / "verify"
    with pytest.raises(SystemExit) as exc_info:
        main(["verify", "-c", config, "-o", str(out)])
    assert exc_info.value.code == EXIT_VERIFY
    assert (out / "verify.csv").read_text().splitlines()[1] == "drift_law,false,1.0,1e-08,integrator"
    assert (out / "manifest.json").exists()
    assert "drift_law" in capsys.readouterr().err
