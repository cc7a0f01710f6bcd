"""Tests for lmcf_lab.polygon_figure module."""

import math

import numpy as np
import pytest

from lmcf_lab import ale_quotient as aq
from lmcf_lab.polygon_figure import PolygonFigure, boundary_pieces, level_line, render_polygon


@pytest.fixture
def delta():
    return aq.polygon(aq.AleParams(n=1, alpha=(1.0,)))


def test_boundary_pieces(delta):
    """Test the vertex chain and the two unbounded edges."""
    chain, top, bottom = boundary_pieces(delta, extent=2.0)
    assert np.allclose(chain, [[1.0, 0.0], [0.0, -1.0]])
    assert np.allclose(top[0], [1.0, 0.0])
    assert np.allclose(top[1], [1.0 + 4.0 / math.sqrt(5.0), 2.0 / math.sqrt(5.0)])
    assert np.allclose(bottom, [[0.0, -1.0], [0.0, -3.0]])


def test_boundary_pieces_default_extent(delta):
    """Test the default extent is at least one."""
    _, top, _ = boundary_pieces(delta)
    assert np.linalg.norm(top[1] - top[0]) == pytest.approx(1.0)


def test_level_line_bounded(delta):
    """Test a bounded r_c is drawn between its endpoints."""
    segment = aq.level_segment(delta.params, 2, -1, 3.0)
    line = level_line(segment, 10.0)
    ends = line[np.argsort(line[:, 0])]
    assert np.allclose(ends, [[0.0, -3.0], [5.0 / 3.0, 1.0 / 3.0]])


def test_level_line_ray_is_cut(delta):
    """Test an unbounded r_c is cut at the extent."""
    segment = aq.level_segment(delta.params, 1, 1, 2.0)
    line = level_line(segment, 3.0)
    assert np.linalg.norm(line[1] - line[0]) == pytest.approx(3.0)
    assert np.allclose(line.sum(axis=1), 2.0)


def test_render_polygon_writes_pdf(tmp_path, delta):
    """Test a one-page PDF is written."""
    path = render_polygon(delta, tmp_path / "figs" / "polygon.pdf",
                          aq.level_segment(delta.params, 1, 1, 2.0))
    assert path.exists()
    assert path.read_bytes().startswith(b"%PDF")


def test_render_polygon_is_deterministic(tmp_path, delta):
    """Test reruns give byte-identical files."""
    first = render_polygon(delta, tmp_path / "a" / "polygon.pdf").read_bytes()
    second = render_polygon(delta, tmp_path / "b" / "polygon.pdf").read_bytes()
    assert first == second


def test_polygon_figure_custom_title(tmp_path):
    """Test a larger polygon with an explicit heading."""
    delta = aq.polygon(aq.AleParams.from_h((0.0, 1.0, 2.0)))
    figure = PolygonFigure(tmp_path / "n2.pdf", font="Courier")
    figure.create_pdf(delta, title="A2")
    assert (tmp_path / "n2.pdf").stat().st_size > 0
