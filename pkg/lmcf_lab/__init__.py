"""lmcf-lab: numerical laboratory for Lagrangian mean curvature flows built from moment maps."""

__version__ = "0.1.0"
