"""Command-line interface for lmcf-lab."""

import argparse
import dataclasses
import math
import os
import sys
import time
import traceback
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from . import __version__
from . import ale_quotient as aq
from .artifacts import (
    ARTIFACT_FILES,
    DIAGNOSTICS_FILE,
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
from .config import ScenarioConfig, load_scenario, load_settings
from .errors import ConfigError, LmcfError
from .flat_models import (
    ShrinkerModel,
    TranslatorModel,
    level_set_sample,
    shrinker_ambient,
    translator_ambient,
)
from .flow_engine import (
    SubtorusAction,
    ale_ambient,
    decay_constants,
    extinction_time,
    integrate_flow,
)
from .geometry_core import AmbientModel
from .invariants import verify_ale, verify_flat
from .polygon_figure import boundary_pieces, render_polygon
from .singularity_lab import singularity_report
from .utils import format_float, setup_logging

logger = setup_logging()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

# Auto horizons stop short of the first singular time by this factor
AUTO_HORIZON = 0.999

# Radii around P_k0 and far out at which the chart metric and |χ|·|p| are sampled
DISTORTION_RADII = (0.05, 0.2)
DECAY_RADII = (4.0, 8.0, 16.0)

COMMAND_OUTPUTS = {
    "flow": ("trajectory_jsonl", "trajectory_csv", "drift_summary"),
    "polygon": ("polygon_json", "polygon_plot", "polygon_pdf"),
    "blowup": ("report_json", "distance_plot", "typeI_plot"),
    "verify": ("verify_table", "curvature_csv"),
}
# Written only when the scenario asks for them
OPTIONAL_OUTPUTS = {"polygon_pdf"}


class VerificationFailed(Exception):
    """Raised by commands whose checks did not all pass."""

    def __init__(self, failures):
        super().__init__(", ".join(failures))
        self.failures = failures


def parse_args(argv=None):
    """Parse command-line arguments.

    Returns:
        argparse.Namespace: Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog="lmcf",
        description="Torus-invariant Lagrangian mean curvature flow lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  lmcf flow --config scenarios/shrinker.json --out runs/shrinker
  lmcf polygon --config scenarios/ale_n2.json --out runs/polygon
  lmcf blowup --config scenarios/ale_n1.json --out runs/blowup
  lmcf verify --config scenarios/ale_n1.json --out runs/verify --check
        """
    )

    parser.add_argument(
        "command",
        choices=sorted(COMMAND_OUTPUTS),
        help="What to run"
    )

    parser.add_argument(
        "-c", "--config",
        required=True,
        metavar="FILE",
        help="Scenario document (JSON)"
    )

    parser.add_argument(
        "-o", "--out",
        metavar="DIR",
        help="Output directory (default: output_directory from ~/.lmcf/config.yaml)"
    )

    parser.add_argument(
        "--seed",
        type=int,
        metavar="N",
        help="Override the scenario's sampling seed"
    )

    parser.add_argument(
        "--check",
        action="store_true",
        help="Compare the new checksums against the manifest already in the output directory"
    )

    parser.add_argument(
        "-v", "--version",
        action="version",
        version=f"lmcf {__version__}"
    )

    return parser.parse_args(argv)


def worker_count(settings):
    """Thread count from LMCF_THREADS, then settings, then the logical core count.

    Raises:
        ConfigError: If LMCF_THREADS is not a positive integer
    """
    env = os.environ.get("LMCF_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"expected a positive integer, got {env!r}", path="LMCF_THREADS")
        if value < 1:
            raise ConfigError(f"expected a positive integer, got {env!r}", path="LMCF_THREADS")
        return value
    if settings.threads:
        return int(settings.threads)
    return os.cpu_count() or 1


@dataclass
class ScenarioRun:
    """Models and seeds built from a scenario."""

    scenario: ScenarioConfig
    ambient: AmbientModel
    seeds: list
    tags: Tuple[str, ...] = ()
    singular_time: float = math.inf
    flat: Optional[object] = None
    params: Optional[aq.AleParams] = None
    action: Optional[SubtorusAction] = None

    @property
    def a_H(self):
        return self.ambient.a_H + self.scenario.a_h_offset


def build_run(scenario):
    """Construct the ambient model, seeds on V_{c₀} and the first singular time."""
    spec = scenario.model
    if spec.kind == "ale":
        params = aq.AleParams(n=spec.n, alpha=spec.alpha, h0=spec.h0)
        action = SubtorusAction(a=spec.a, b=spec.b, n=spec.n)
        samples = aq.ale_level_sample(params, action.a, action.b, scenario.c0, scenario.samples,
                                      scenario.sheets)
        return ScenarioRun(
            scenario=scenario,
            ambient=ale_ambient(params, action),
            seeds=[s.point.as_array() for s in samples],
            tags=tuple(s.sheet for s in samples),
            singular_time=extinction_time(action, scenario.c0, params),
            params=params,
            action=action,
        )

    if spec.kind == "shrinker":
        model = ShrinkerModel(spec.weights)
        ambient = shrinker_ambient(model)
    else:
        model = TranslatorModel(spec.weights)
        ambient = translator_ambient(model)
    return ScenarioRun(
        scenario=scenario,
        ambient=ambient,
        seeds=level_set_sample(model, scenario.c0, scenario.samples, scenario.seed),
        singular_time=extinction_time(model, scenario.c0),
        flat=model,
    )


def resolve_horizon(run):
    """Numeric horizon; "auto" is AUTO_HORIZON times the first singular time.

    Raises:
        ConfigError: If "auto" is requested and the flow never becomes singular
    """
    horizon = run.scenario.horizon
    if horizon != "auto":
        return float(horizon)
    if not math.isfinite(run.singular_time):
        raise ConfigError("auto horizon needs a finite singular time; give a number", path="horizon")
    return AUTO_HORIZON * run.singular_time


def integrate(run, horizon, workers):
    singular = run.singular_time if math.isfinite(run.singular_time) else None
    return integrate_flow(run.ambient, run.scenario.c0, horizon, run.scenario.integrator, run.seeds,
                          singular_time=singular, workers=workers, tags=run.tags)


def requested_outputs(command, scenario):
    """Artifacts this command writes: its defaults plus requested optional ones."""
    names = [name for name in COMMAND_OUTPUTS[command]
             if name not in OPTIONAL_OUTPUTS or name in scenario.outputs]
    for name in scenario.outputs:
        if name not in COMMAND_OUTPUTS[command]:
            logger.warning(f"Artifact {name} is not produced by '{command}'; ignored")
    return names


def _path(out_dir, name):
    return Path(out_dir) / ARTIFACT_FILES[name]


def _emit(manifest, name, path):
    manifest.record(name, path)
    print(f"  ✓ {path}")


def cmd_flow(scenario, out_dir, manifest, workers):
    """Integrate the scenario and write trajectory files plus the drift summary."""
    run = build_run(scenario)
    horizon = resolve_horizon(run)
    start = time.perf_counter()
    trajectory = integrate(run, horizon, workers)
    manifest.timings["flow"] = time.perf_counter() - start

    outputs = requested_outputs("flow", scenario)
    if "trajectory_jsonl" in outputs:
        _emit(manifest, "trajectory_jsonl", write_trajectory_jsonl(_path(out_dir, "trajectory_jsonl"),
                                                                   trajectory))
    if "trajectory_csv" in outputs:
        _emit(manifest, "trajectory_csv", write_trajectory_csv(_path(out_dir, "trajectory_csv"),
                                                               trajectory))
    if "drift_summary" in outputs:
        summary = drift_summary(trajectory, run.a_H)
        summary["horizon"] = horizon
        _emit(manifest, "drift_summary", write_json(_path(out_dir, "drift_summary"), summary))
    return trajectory


def _ale_only(scenario, command):
    if scenario.model.kind != "ale":
        raise ConfigError(f"'{command}' needs an ale model", path="model.kind")


def cmd_polygon(scenario, out_dir, manifest, workers=1):
    """Write Δ as JSON, a two-column boundary polyline and optionally a PDF figure."""
    _ale_only(scenario, "polygon")
    spec = scenario.model
    params = aq.AleParams(n=spec.n, alpha=spec.alpha, h0=spec.h0)
    delta = aq.polygon(params)
    outputs = requested_outputs("polygon", scenario)

    if "polygon_json" in outputs:
        _emit(manifest, "polygon_json", write_json(_path(out_dir, "polygon_json"), delta.as_dict()))
    if "polygon_plot" in outputs:
        rows = []
        for piece in boundary_pieces(delta):
            if rows:
                rows.append(None)
            rows.extend(piece.tolist())
        _emit(manifest, "polygon_plot", write_columns(_path(out_dir, "polygon_plot"), rows, "x y"))
    if "polygon_pdf" in outputs:
        segment = None
        try:
            segment = aq.level_segment(params, spec.a, spec.b, scenario.c0)
        except LmcfError as e:
            logger.warning(f"Level line omitted from the figure: {e}")
        _emit(manifest, "polygon_pdf", render_polygon(delta, _path(out_dir, "polygon_pdf"), segment))
    return delta


def cmd_blowup(scenario, out_dir, manifest, workers):
    """Schedule, blow-up weights, rescaled distances and type-I series near the first singularity."""
    _ale_only(scenario, "blowup")
    if scenario.model.a == 0:
        raise ConfigError("no singularity schedule for a static action (a = 0)", path="model.a")
    run = build_run(scenario)
    if not math.isfinite(run.singular_time):
        raise ConfigError("no singularity schedule: the flow never reaches a fixed point", path="c0")

    start = time.perf_counter()
    trajectory = integrate(run, run.singular_time, workers)
    manifest.timings["flow"] = time.perf_counter() - start
    start = time.perf_counter()
    spec = scenario.blowup
    report = singularity_report(run.params, run.action, scenario.c0, trajectory, spec.taus,
                                spec.radius_factor, spec.window, spec.sample_count,
                                spacing=spec.spacing, workers=workers)
    manifest.timings["analysis"] = time.perf_counter() - start

    outputs = requested_outputs("blowup", scenario)
    if "report_json" in outputs:
        data = report.as_dict()
        data["halt_time"] = trajectory.times[-1]
        k0 = report.schedule.k0
        data["chart_distortion"] = {format_float(r): aq.chart_distortion(run.params, k0, r)
                                    for r in DISTORTION_RADII}
        data["decay_constants"] = {format_float(r): v for r, v in
                                   decay_constants(run.params, run.action, DECAY_RADII).items()}
        _emit(manifest, "report_json", write_json(_path(out_dir, "report_json"), data))
    if "distance_plot" in outputs:
        _emit(manifest, "distance_plot", write_columns(_path(out_dir, "distance_plot"),
                                                       report.distances, "tau distance"))
    if "typeI_plot" in outputs:
        _emit(manifest, "typeI_plot", write_columns(_path(out_dir, "typeI_plot"),
                                                    report.type_one.series, "tau sup_A product"))
    return report


def cmd_verify(scenario, out_dir, manifest, workers, sizes=None):
    """Run the invariant suites for the scenario's model and write the tables.

    Raises:
        VerificationFailed: If any check fails (after the tables are written)
    """
    run = build_run(scenario)
    horizon = resolve_horizon(run)
    if run.params is not None and math.isfinite(run.singular_time):
        # the blow-up checks need the flow carried to the singular time
        horizon = max(horizon, run.singular_time)

    start = time.perf_counter()
    trajectory = integrate(run, horizon, workers)
    manifest.timings["flow"] = time.perf_counter() - start
    start = time.perf_counter()
    if run.params is not None:
        summary = verify_ale(scenario, run.params, run.action, trajectory, sizes)
    else:
        summary = verify_flat(scenario, run.flat, trajectory, sizes)
    manifest.timings["verify"] = time.perf_counter() - start

    outputs = requested_outputs("verify", scenario)
    if "verify_table" in outputs:
        _emit(manifest, "verify_table", write_csv(_path(out_dir, "verify_table"),
                                                  ["name", "passed", "measured", "threshold", "tier"],
                                                  [r.row() for r in summary.results]))
    if "curvature_csv" in outputs:
        _emit(manifest, "curvature_csv", write_csv(_path(out_dir, "curvature_csv"),
                                                   ["point", "|H|", "residual"], summary.curvature_rows))
    if not summary.passed:
        raise VerificationFailed(summary.failures)
    return summary


COMMANDS = {
    "flow": cmd_flow,
    "polygon": cmd_polygon,
    "blowup": cmd_blowup,
    "verify": cmd_verify,
}


def _fail(code, message):
    print(f"Error: {message}", file=sys.stderr)
    logger.error(message)
    sys.exit(code)


def _write_diagnostics(out_dir, command, error):
    details = getattr(error, "details", {})
    data = {
        "command": command,
        "error": type(error).__name__,
        "message": str(error),
        "details": details,
        "traceback": traceback.format_exception(type(error), error, error.__traceback__),
    }
    try:
        return write_json(Path(out_dir) / DIAGNOSTICS_FILE, data)
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Could not write diagnostics: {e}")
        return None


def main(argv=None):
    """Main entry point for the CLI."""
    args = parse_args(argv)

    try:
        settings = load_settings()
        setup_logging(settings.log_level)
        scenario = load_scenario(args.config, settings)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("must be >= 0", path="--seed")
            scenario = dataclasses.replace(scenario, seed=args.seed)
        workers = worker_count(settings)
    except ConfigError as e:
        _fail(EXIT_CONFIG, str(e))

    out_dir = Path(args.out or settings.output_directory)
    previous = None
    if args.check:
        previous = load_manifest(out_dir)
        if previous is None:
            _fail(EXIT_CONFIG, f"--check needs an existing manifest in '{out_dir}'")
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(command=args.command, config=scenario.echo())
    logger.info(f"Running '{args.command}' on {scenario.source} with {workers} worker(s)")
    print(f"Running {args.command} ({scenario.model.kind})...")

    code = EXIT_OK
    start = time.perf_counter()
    try:
        COMMANDS[args.command](scenario, out_dir, manifest, workers)
    except ConfigError as e:
        _fail(EXIT_CONFIG, str(e))
    except VerificationFailed as e:
        print(f"Error: violated invariants: {', '.join(e.failures)}", file=sys.stderr)
        logger.error(f"Verification failed: {e.failures}")
        code = EXIT_VERIFY
    except Exception as e:
        # library errors and unexpected runtime failures alike end in exit 3
        path = _write_diagnostics(out_dir, args.command, e)
        logger.error(f"Runtime failure in '{args.command}': {e}")
        print(f"Error: {e}", file=sys.stderr)
        if path is not None:
            print(f"Diagnostics written to {path}", file=sys.stderr)
        sys.exit(EXIT_RUNTIME)
    manifest.timings["total"] = time.perf_counter() - start
    manifest.write(out_dir)

    if previous is not None:
        mismatched = compare_checksums(previous, manifest)
        if mismatched:
            print(f"Error: checksums differ from the previous run: {', '.join(mismatched)}",
                  file=sys.stderr)
            logger.error(f"Checksum mismatch: {mismatched}")
            code = EXIT_VERIFY
        else:
            print("Checksums match the previous manifest.")

    if code != EXIT_OK:
        sys.exit(code)
    print(f"\nDone: {len(manifest.files)} file(s) in {out_dir}")


if __name__ == "__main__":
    main()
