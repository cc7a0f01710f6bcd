"""Tests for lmcf_lab.artifacts module."""

import csv
import json
import math

import numpy as np
import pytest

from lmcf_lab.artifacts import (
    MANIFEST_FILE,
    RunManifest,
    compare_checksums,
    drift_summary,
    load_manifest,
    write_columns,
    write_csv,
    write_json,
    write_trajectory_csv,
    write_trajectory_jsonl,
)
from lmcf_lab.flat_models import ShrinkerModel, level_set_sample, shrinker_ambient
from lmcf_lab.flow_engine import IntegratorConfig, integrate_flow


@pytest.fixture(scope="module")
def trajectory():
    """Round shrinker flow, three seeds, five recorded times."""
    model = ShrinkerModel((1, 1))
    seeds = level_set_sample(model, 1.0, 3, seed=0)
    return integrate_flow(shrinker_ambient(model), 1.0, 0.04, IntegratorConfig(step=0.01), seeds)


def test_write_json_cleans_values(tmp_path):
    """Test numpy scalars, arrays and infinities are converted."""
    path = write_json(tmp_path / "out" / "data.json",
                      {"b": np.float64(1.5), "a": [np.int64(2), math.inf], "c": np.array([1.0]),
                       "d": np.bool_(True)})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [2, "inf"], "b": 1.5, "c": [1.0], "d": True}


def test_write_trajectory_jsonl(tmp_path, trajectory):
    """Test one record per time and seed."""
    path = write_trajectory_jsonl(tmp_path / "trajectory.jsonl", trajectory)
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(records) == len(trajectory.times) * 3
    first = records[0]
    assert set(first) == {"t", "seed_index", "point", "drift_residual"}
    assert len(first["point"]) == 4
    assert records[-1]["t"] == pytest.approx(0.04)
    assert max(r["drift_residual"] for r in records) < 1e-8


def test_write_trajectory_csv(tmp_path, trajectory):
    """Test the wide CSV header and row count."""
    path = write_trajectory_csv(tmp_path / "trajectory.csv", trajectory)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "seed_index", "re_0", "re_1", "im_0", "im_1", "drift_residual"]
    assert len(rows) == 1 + len(trajectory.times) * 3


def test_trajectory_files_are_byte_identical(tmp_path, trajectory):
    """Test rewriting the same trajectory gives the same bytes."""
    first = write_trajectory_csv(tmp_path / "a.csv", trajectory).read_bytes()
    second = write_trajectory_csv(tmp_path / "b.csv", trajectory).read_bytes()
    assert first == second


def test_drift_summary(trajectory):
    """Test the summary fields of a horizon run."""
    summary = drift_summary(trajectory)
    assert summary["halt_reason"] == "horizon"
    assert summary["seeds"] == 3
    assert summary["steps"] == len(trajectory.times) - 1
    assert summary["a_H"] == 2.0
    assert summary["max_drift_residual"] < 1e-8


def test_write_csv(tmp_path):
    """Test header and rows are written with newline terminators."""
    path = write_csv(tmp_path / "table.csv", ["name", "value"], [["x", "1.0"]])
    assert path.read_text() == "name,value\nx,1.0\n"


def test_write_columns_separates_pieces(tmp_path):
    """Test None rows become blank lines between polyline pieces."""
    path = write_columns(tmp_path / "plot.dat", [(0.0, 1.0), None, (2.5, -1.0)], header="x y")
    assert path.read_text() == "# x y\n0.0 1.0\n\n2.5 -1.0\n"


def test_manifest_record_and_write(tmp_path):
    """Test checksums are recorded and the manifest written."""
    artifact = tmp_path / "polygon.json"
    artifact.write_text("{}\n")
    manifest = RunManifest(command="polygon", config={"c0": 1.0})
    manifest.record("polygon_json", artifact)
    with pytest.raises(ValueError):
        manifest.record("polygon_json", artifact)
    manifest.timings["total"] = 0.1
    manifest.write(tmp_path)
    loaded = load_manifest(tmp_path)
    assert loaded["command"] == "polygon"
    assert loaded["files"]["polygon_json"]["path"] == "polygon.json"
    assert set(loaded["versions"]) == {"lmcf_lab", "numpy", "scipy", "python"}
    assert (tmp_path / MANIFEST_FILE).exists()


def test_load_manifest_missing(tmp_path):
    """Test a directory without a manifest gives None."""
    assert load_manifest(tmp_path) is None


def test_compare_checksums(tmp_path):
    """Test changed and new artifacts are reported."""
    artifact = tmp_path / "verify.csv"
    artifact.write_text("a\n")
    before = RunManifest(command="verify", config={})
    before.record("verify_table", artifact)
    previous = before.as_dict()

    same = RunManifest(command="verify", config={})
    same.record("verify_table", artifact)
    assert compare_checksums(previous, same) == []

    artifact.write_text("b\n")
    extra = tmp_path / "curvature.csv"
    extra.write_text("c\n")
    changed = RunManifest(command="verify", config={})
    changed.record("verify_table", artifact)
    changed.record("curvature_csv", extra)
    assert compare_checksums(previous, changed) == ["verify_table", "curvature_csv"]
