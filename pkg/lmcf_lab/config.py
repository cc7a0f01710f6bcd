"""Configuration management for lmcf-lab.

Two layers: user settings in ``~/.lmcf/config.yaml`` and a per-run scenario
document (JSON, read through the YAML loader).
"""

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import yaml

from .ale_quotient import SHEETS
from .errors import ConfigError
from .utils import get_config_dir, get_config_file, setup_logging

logger = setup_logging()

DEFAULT_CONFIG = """# Output settings
output_directory: "output"   # Used when --out is not given

# Execution
threads: 0                   # Worker threads (0 = logical cores; LMCF_THREADS overrides)
log_level: "DEBUG"           # File log level in ~/.lmcf/lmcf.log

# Integrator defaults (a scenario's "integrator" block overrides these)
step: 0.001
projection_tol: 1.0e-12
max_newton: 25
stop_margin: 1.0e-6

# Sampling
samples: 16                  # Level-set seeds per sheet
fiber_samples: 8             # Group parameters per seed for product immersions

# Blow-up analysis
radius_factor: 5.0
window: 5.0
"""

KNOWN_OUTPUTS = (
    "trajectory_jsonl",
    "trajectory_csv",
    "drift_summary",
    "polygon_json",
    "polygon_plot",
    "polygon_pdf",
    "report_json",
    "distance_plot",
    "typeI_plot",
    "verify_table",
    "curvature_csv",
)


class ScenarioLoader(yaml.SafeLoader):
    """Safe loader that also reads JSON exponent floats such as ``1e-3``."""


ScenarioLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


class Settings:
    """User settings holder for lmcf-lab."""

    def __init__(self, data):
        self.output_directory = data.get("output_directory", "output")
        self.threads = data.get("threads", 0)
        self.log_level = data.get("log_level", "DEBUG")
        self.step = data.get("step", 1e-3)
        self.projection_tol = data.get("projection_tol", 1e-12)
        self.max_newton = data.get("max_newton", 25)
        self.stop_margin = data.get("stop_margin", 1e-6)
        self.samples = data.get("samples", 16)
        self.fiber_samples = data.get("fiber_samples", 8)
        self.radius_factor = data.get("radius_factor", 5.0)
        self.window = data.get("window", 5.0)


def create_default_config():
    """Write DEFAULT_CONFIG to ~/.lmcf/config.yaml unless it is already there.

    Returns:
        bool: True if the file was written by this call
    """
    target = get_config_file()
    if target.exists():
        return False

    get_config_dir().mkdir(parents=True, exist_ok=True)
    target.write_text(DEFAULT_CONFIG)
    logger.info(f"Wrote default settings to {target}")
    return True


def load_settings():
    """Load user settings, creating the default file on first run.

    Returns:
        Settings: Settings object

    Raises:
        ConfigError: If the settings file cannot be read or parsed
    """
    config_file = get_config_file()

    if create_default_config():
        logger.info(f"First run: settings defaults written to {config_file}")

    try:
        with open(config_file, "r") as f:
            data = yaml.load(f, Loader=ScenarioLoader)
        logger.debug(f"Settings read from {config_file}")
    except yaml.YAMLError as e:
        logger.error(f"Settings file does not parse: {e}")
        raise ConfigError(f"invalid YAML: {e}", path=str(config_file))
    except OSError as e:
        logger.error(f"Settings file unreadable: {e}")
        raise ConfigError(f"cannot read settings: {e}", path=str(config_file))

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("settings must be a mapping", path=str(config_file))

    return Settings(data)


@dataclass(frozen=True)
class ModelSpec:
    """Tagged model description: ``shrinker``, ``translator`` or ``ale``."""

    kind: str
    weights: Tuple[float, ...] = ()
    n: int = 0
    alpha: Tuple[float, ...] = ()
    h0: float = 0.0
    a: int = 0
    b: int = 0


@dataclass(frozen=True)
class BlowupSpec:
    """Knobs for the rescaling and type-I analyses."""

    taus: Tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    radius_factor: float = 5.0
    window: float = 5.0
    sample_count: int = 200
    spacing: float = 0.3


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario document."""

    model: ModelSpec
    c0: float
    horizon: Union[str, float]
    integrator: object
    outputs: Tuple[str, ...] = ()
    seed: int = 0
    samples: int = 16
    fiber_samples: int = 8
    sheets: Tuple[str, ...] = SHEETS
    blowup: BlowupSpec = field(default_factory=BlowupSpec)
    a_h_offset: float = 0.0
    source: Optional[str] = None

    def echo(self):
        """Plain-dict form of the scenario for manifests."""
        model = {"kind": self.model.kind}
        if self.model.kind == "ale":
            model.update(n=self.model.n, alpha=list(self.model.alpha), h0=self.model.h0,
                         a=self.model.a, b=self.model.b)
        else:
            model["weights"] = list(self.model.weights)
        return {
            "model": model,
            "c0": self.c0,
            "horizon": self.horizon,
            "integrator": {
                "step": self.integrator.step,
                "projection_tol": self.integrator.projection_tol,
                "max_newton": self.integrator.max_newton,
                "stop_margin": self.integrator.stop_margin,
            },
            "outputs": list(self.outputs),
            "seed": self.seed,
            "samples": self.samples,
            "fiber_samples": self.fiber_samples,
            "sheets": list(self.sheets),
            "blowup": {
                "taus": list(self.blowup.taus),
                "radius_factor": self.blowup.radius_factor,
                "window": self.blowup.window,
                "sample_count": self.blowup.sample_count,
                "spacing": self.blowup.spacing,
            },
            "a_h_offset": self.a_h_offset,
        }


def _require(data, key, path):
    if key not in data:
        raise ConfigError("missing required field", path=path)
    return data[key]


def _real(value, path, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path=path)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path=path)
    if positive and value <= 0:
        raise ConfigError("must be positive", path=path)
    return value


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path=path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}", path=path)
    return value


def _list(value, path):
    if not isinstance(value, list):
        raise ConfigError(f"expected a list, got {value!r}", path=path)
    return value


def _parse_model(data):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path="model")
    kind = _require(data, "kind", "model.kind")

    if kind == "shrinker":
        weights = _list(_require(data, "weights", "model.weights"), "model.weights")
        if not weights:
            raise ConfigError("needs at least one weight", path="model.weights")
        parsed = []
        for i, w in enumerate(weights):
            w = _integer(w, f"model.weights[{i}]")
            if w == 0:
                raise ConfigError("shrinker weights must be nonzero", path=f"model.weights[{i}]")
            parsed.append(w)
        return ModelSpec(kind="shrinker", weights=tuple(parsed))

    if kind == "translator":
        weights = _list(data.get("weights", []), "model.weights")
        parsed = tuple(_real(w, f"model.weights[{i}]") for i, w in enumerate(weights))
        return ModelSpec(kind="translator", weights=parsed)

    if kind == "ale":
        n = _integer(_require(data, "n", "model.n"), "model.n", minimum=1)
        alpha = _list(_require(data, "alpha", "model.alpha"), "model.alpha")
        parsed = []
        for i in range(n):
            if i >= len(alpha):
                raise ConfigError(f"missing entry (n={n} needs {n} values)", path=f"model.alpha[{i}]")
            parsed.append(_real(alpha[i], f"model.alpha[{i}]", positive=True))
        if len(alpha) > n:
            raise ConfigError(f"unexpected entry (n={n})", path=f"model.alpha[{n}]")
        h0 = _real(data.get("h0", 0.0), "model.h0")
        a = _integer(_require(data, "a", "model.a"), "model.a")
        b = _integer(_require(data, "b", "model.b"), "model.b")
        if math.gcd(abs(a), abs(b)) != 1:
            raise ConfigError(f"a and b must be coprime, got ({a}, {b})", path="model.b")
        for l in range(n + 2):
            if b == -l * a:
                raise ConfigError(f"excluded slope: b = -{l}*a", path="model.b")
        return ModelSpec(kind="ale", n=n, alpha=tuple(parsed), h0=h0, a=a, b=b)

    raise ConfigError(f"unknown model kind {kind!r}", path="model.kind")


def parse_scenario(data, settings=None, source=None):
    """Validate a scenario mapping.

    Args:
        data: Parsed JSON document
        settings: Optional Settings supplying defaults
        source: Path the document was read from (for the manifest)

    Returns:
        ScenarioConfig: Validated scenario

    Raises:
        ConfigError: On the first invalid field, naming its path
    """
    from .flow_engine import IntegratorConfig

    settings = settings or Settings({})
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")

    model = _parse_model(_require(data, "model", "model"))
    c0 = _real(_require(data, "c0", "c0"), "c0")

    horizon = data.get("horizon", "auto")
    if horizon != "auto":
        horizon = _real(horizon, "horizon", positive=True)

    integ = data.get("integrator", {})
    if not isinstance(integ, dict):
        raise ConfigError("expected an object", path="integrator")
    try:
        integrator = IntegratorConfig(
            step=_real(integ.get("step", settings.step), "integrator.step", positive=True),
            projection_tol=_real(integ.get("projection_tol", settings.projection_tol),
                                 "integrator.projection_tol", positive=True),
            max_newton=_integer(integ.get("max_newton", settings.max_newton),
                                "integrator.max_newton", minimum=1),
            stop_margin=_real(integ.get("stop_margin", settings.stop_margin),
                              "integrator.stop_margin", positive=True),
        )
    except ValueError as e:
        raise ConfigError(str(e), path="integrator")

    outputs = _list(data.get("outputs", []), "outputs")
    for i, name in enumerate(outputs):
        if name not in KNOWN_OUTPUTS:
            raise ConfigError(f"unknown artifact {name!r}", path=f"outputs[{i}]")
    if len(set(outputs)) != len(outputs):
        raise ConfigError("duplicate artifact request", path="outputs")

    sheets = _list(data.get("sheets", list(SHEETS)), "sheets")
    for i, s in enumerate(sheets):
        if s not in SHEETS:
            raise ConfigError(f"unknown sheet {s!r}", path=f"sheets[{i}]")

    blow = data.get("blowup", {})
    if not isinstance(blow, dict):
        raise ConfigError("expected an object", path="blowup")
    taus = _list(blow.get("taus", list(BlowupSpec().taus)), "blowup.taus")
    blowup = BlowupSpec(
        taus=tuple(_real(t, f"blowup.taus[{i}]", positive=True) for i, t in enumerate(taus)),
        radius_factor=_real(blow.get("radius_factor", settings.radius_factor),
                            "blowup.radius_factor", positive=True),
        window=_real(blow.get("window", settings.window), "blowup.window", positive=True),
        sample_count=_integer(blow.get("sample_count", 200), "blowup.sample_count", minimum=8),
        spacing=_real(blow.get("spacing", BlowupSpec.spacing), "blowup.spacing", positive=True),
    )

    return ScenarioConfig(
        model=model,
        c0=c0,
        horizon=horizon,
        integrator=integrator,
        outputs=tuple(outputs),
        seed=_integer(data.get("seed", 0), "seed", minimum=0),
        samples=_integer(data.get("samples", settings.samples), "samples", minimum=1),
        fiber_samples=_integer(data.get("fiber_samples", settings.fiber_samples),
                               "fiber_samples", minimum=1),
        sheets=tuple(sheets),
        blowup=blowup,
        a_h_offset=_real(data.get("a_h_offset", 0.0), "a_h_offset"),
        source=source,
    )


def load_scenario(path, settings=None):
    """Read and validate a scenario document.

    Args:
        path: Path to the JSON scenario
        settings: Optional Settings supplying defaults

    Returns:
        ScenarioConfig: Validated scenario

    Raises:
        ConfigError: If the file is missing, unparsable or invalid
    """
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = yaml.load(f, Loader=ScenarioLoader)
    except FileNotFoundError:
        raise ConfigError(f"scenario file '{path}' not found")
    except yaml.YAMLError as e:
        raise ConfigError(f"scenario file is not valid JSON: {e}")

    scenario = parse_scenario(data, settings=settings, source=str(path))
    logger.info(f"Loaded scenario {path} ({scenario.model.kind})")
    return scenario
