"""Exception hierarchy for lmcf-lab.

Library code raises these; only the CLI turns them into exit codes.
"""


class LmcfError(Exception):
    """Base for all lmcf-lab errors.

    Args:
        message: Human-readable description
        **details: Structured diagnostics, serialised by the CLI
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class GeometryError(LmcfError):
    """Raised when a geometric evaluation is asked for outside its domain."""


class NumericalDomain(GeometryError):
    """Non-finite values or a solver that failed to converge."""


class DegenerateFrame(GeometryError):
    """A frame or Gram matrix is rank deficient."""


class DimensionError(GeometryError):
    """Vector length does not match the model."""


class OutsideDomain(GeometryError):
    """Point or level excluded from the domain of a formula."""


class EmptyLevel(GeometryError):
    """The requested level set has no points."""


class OutsidePolygon(GeometryError):
    """Moment coordinates lie outside the moment polygon."""


class CorruptPoint(GeometryError):
    """A representative violates the level-set invariants."""


class BoundaryAmbiguity(GeometryError):
    """A point is too close to a stratum boundary to classify."""

    def __init__(self, message, distance=None, **details):
        super().__init__(message, distance=distance, **details)
        self.distance = distance


class OutsideChart(GeometryError):
    """A point lies outside the domain of a local chart."""


class FlowError(LmcfError):
    """Base for flow integration and singularity analysis failures."""


class FixedPointHit(FlowError):
    """A trajectory reached a fixed point of the action."""


class ProjectionFailure(FlowError):
    """Newton projection back onto the constraint set diverged."""


class OnFixedLevel(FlowError):
    """The initial level already contains a fixed point."""


class EmptyWindow(FlowError):
    """No samples fall into the requested window."""


class ConfigError(LmcfError):
    """Invalid user settings or scenario document.

    Args:
        message: Description of the problem
        path: Dotted field path such as ``model.alpha[1]``
    """

    def __init__(self, message, path=None):
        super().__init__(message, path=path)
        self.path = path

    def __str__(self):
        base = super().__str__()
        if self.path:
            return f"{self.path}: {base}"
        return base
