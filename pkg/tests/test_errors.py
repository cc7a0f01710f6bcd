"""Tests for lmcf_lab.errors module."""

import pytest

from lmcf_lab.errors import (
    BoundaryAmbiguity,
    ConfigError,
    EmptyWindow,
    FlowError,
    GeometryError,
    LmcfError,
    OutsideChart,
)


def test_details_are_kept():
    """Test structured details travel with the exception."""
    err = OutsideChart("left the chart", point=[1.0, 2.0])
    assert err.details == {"point": [1.0, 2.0]}
    assert isinstance(err, GeometryError)
    assert isinstance(err, LmcfError)


def test_boundary_ambiguity_distance():
    """Test the distance to the stratum boundary is exposed."""
    err = BoundaryAmbiguity("too close", distance=1e-9)
    assert err.distance == 1e-9
    assert err.details["distance"] == 1e-9


def test_flow_errors_share_base():
    """Test flow failures are catchable as FlowError."""
    with pytest.raises(FlowError):
        raise EmptyWindow("nothing in the window")


def test_config_error_path_prefix():
    """Test ConfigError names the offending field."""
    assert str(ConfigError("must be positive", path="model.alpha[1]")) == "model.alpha[1]: must be positive"
    assert str(ConfigError("scenario must be a JSON object")) == "scenario must be a JSON object"
