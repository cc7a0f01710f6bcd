"""Artifact writers and the run manifest.

Floats are written with shortest round-trip precision so identical runs
produce byte-identical files.
"""

import csv
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .geometry_core import as_real
from .utils import format_float, json_number, setup_logging, sha256_file

logger = setup_logging()

ARTIFACT_FILES = {
    "trajectory_jsonl": "trajectory.jsonl",
    "trajectory_csv": "trajectory.csv",
    "drift_summary": "drift_summary.json",
    "polygon_json": "polygon.json",
    "polygon_plot": "polygon.dat",
    "polygon_pdf": "polygon.pdf",
    "report_json": "report.json",
    "distance_plot": "distance.dat",
    "typeI_plot": "typeI.dat",
    "verify_table": "verify.csv",
    "curvature_csv": "curvature.csv",
}

MANIFEST_FILE = "manifest.json"
DIAGNOSTICS_FILE = "diagnostics.json"


def _clean(value):
    """Recursively convert numpy scalars and non-finite floats for ``json``."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return json_number(value)
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    return value


def write_json(path, data):
    """Write a JSON document with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def write_trajectory_jsonl(path, trajectory, a_H=None):
    """One record per (time, seed): t, seed_index, point (real parts then imaginary parts), drift_residual."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    levels = trajectory.levels(a_H)
    with open(path, "w") as f:
        for k, t in enumerate(trajectory.times):
            for i, p in enumerate(trajectory.samples[k]):
                record = {
                    "t": json_number(t),
                    "seed_index": i,
                    "point": [json_number(v) for v in as_real(p)],
                    "drift_residual": json_number(abs(trajectory.moments[k][i] - levels[k])),
                }
                f.write(json.dumps(record) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def write_trajectory_csv(path, trajectory, a_H=None):
    """Same content as the JSONL file in wide CSV form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    size = trajectory.samples[0].shape[1]
    header = (["t", "seed_index"] + [f"re_{j}" for j in range(size)]
              + [f"im_{j}" for j in range(size)] + ["drift_residual"])
    levels = trajectory.levels(a_H)
    rows = []
    for k, t in enumerate(trajectory.times):
        for i, p in enumerate(trajectory.samples[k]):
            rows.append([format_float(t), str(i)] + [format_float(v) for v in as_real(p)]
                        + [format_float(abs(trajectory.moments[k][i] - levels[k]))])
    return write_csv(path, header, rows)


def drift_summary(trajectory, a_H=None):
    drift = trajectory.drift_against(a_H)
    pre = trajectory.drift_against(a_H, pre=True)
    return {
        "model": trajectory.model.name,
        "c0": trajectory.c0,
        "a_H": trajectory.model.a_H if a_H is None else a_H,
        "final_time": trajectory.times[-1],
        "steps": len(trajectory.times) - 1,
        "seeds": trajectory.seed_count,
        "halt_reason": trajectory.halt_reason,
        "singular_time": trajectory.singular_time,
        "max_drift_residual": max(drift),
        "max_pre_projection_residual": max(pre),
        "newton_iterations": trajectory.newton_iterations,
        "reseed_flags": list(trajectory.reseed_flags),
    }


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"Wrote {path} ({len(rows)} rows)")
    return path


def write_columns(path, rows, header=None):
    """Whitespace-separated columns for gnuplot; blank lines separate polyline pieces."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {header}"] if header else []
    for row in rows:
        lines.append("" if row is None else " ".join(format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def versions():
    return {
        "lmcf_lab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


@dataclass
class RunManifest:
    """Config echo, versions, produced files with checksums, timings."""

    command: str
    config: dict
    files: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    versions: dict = field(default_factory=versions)

    def record(self, name, path):
        """Register an artifact; each name appears once."""
        if name in self.files:
            raise ValueError(f"artifact {name!r} recorded twice")
        path = Path(path)
        self.files[name] = {"path": path.name, "sha256": sha256_file(path)}

    def as_dict(self):
        return {
            "command": self.command,
            "config": self.config,
            "files": self.files,
            "timings": self.timings,
            "versions": self.versions,
        }

    def write(self, out_dir):
        return write_json(Path(out_dir) / MANIFEST_FILE, self.as_dict())


def load_manifest(out_dir):
    """Previously written manifest in out_dir, or None."""
    path = Path(out_dir) / MANIFEST_FILE
    if not path.exists():
        return None
    return json.loads(path.read_text())


def compare_checksums(previous, manifest):
    """Names whose checksum differs from (or is missing in) the previous manifest."""
    old = previous.get("files", {})
    mismatched = []
    for name, entry in manifest.files.items():
        if old.get(name, {}).get("sha256") != entry["sha256"]:
            mismatched.append(name)
    return mismatched
