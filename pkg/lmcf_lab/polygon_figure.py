"""PDF rendering of the moment polygon Δ with its vertices, edges and a level line."""

import math
from pathlib import Path

import numpy as np
from reportlab.lib import colors
from reportlab.pdfgen import canvas

from .utils import format_float, setup_logging

logger = setup_logging()

# Page dimensions (points)
PAGE_WIDTH = 792
PAGE_HEIGHT = 612

# Layout constants
MARGIN = 60
TITLE_FONT_SIZE = 16
LABEL_FONT_SIZE = 11
VERTEX_RADIUS = 3

# Colors
BG_COLOR = colors.HexColor("#FFFFFF")
EDGE_COLOR = colors.HexColor("#000000")
VERTEX_COLOR = colors.HexColor("#B22222")
LEVEL_COLOR = colors.HexColor("#1F5FBF")
LABEL_COLOR = colors.HexColor("#333333")


def boundary_pieces(delta, extent=None):
    """Polyline pieces of ∂Δ: the vertex chain v_0..v_n, then l_0 and l_{n+1} cut at ``extent``.

    Returns:
        list: Arrays of (x, y) rows; the first starts at v_0 and ends at v_n
    """
    vertices = np.array(delta.vertices, dtype=float)
    n = delta.params.n
    if extent is None:
        span = float(np.ptp(vertices[:, 0]) + np.ptp(vertices[:, 1]))
        extent = max(1.0, 0.5 * span)
    # l_0 leaves v_0 along (n+1, 1); l_{n+1} leaves v_n straight down
    up = np.array([n + 1.0, 1.0])
    top = vertices[0] + extent * up / np.linalg.norm(up)
    bottom = vertices[-1] + np.array([0.0, -extent])
    return [vertices, np.array([vertices[0], top]), np.array([vertices[-1], bottom])]


def level_line(segment, extent):
    """End points of r_c, cut at ``extent`` along infinite directions."""
    lo = segment.s_lo if math.isfinite(segment.s_lo) else segment.s_hi - extent
    hi = segment.s_hi if math.isfinite(segment.s_hi) else segment.s_lo + extent
    return np.array([segment.point(lo), segment.point(hi)])


class PolygonFigure:
    """Single-page figure of Δ."""

    def __init__(self, output_path, font="Helvetica"):
        """Initialize the figure.

        Args:
            output_path: Path to save the PDF
            font: Font family for labels
        """
        self.output_path = str(output_path)
        self.font = font
        self.c = None
        self._scale = 1.0
        self._origin = (0.0, 0.0)

    def _fit(self, pieces):
        pts = np.vstack(pieces)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        width = PAGE_WIDTH - 2 * MARGIN
        height = PAGE_HEIGHT - 2 * MARGIN - 2 * TITLE_FONT_SIZE
        self._scale = float(min(width / span[0], height / span[1]))
        self._origin = (float(lo[0]), float(lo[1]))

    def _page(self, x, y):
        return (MARGIN + (x - self._origin[0]) * self._scale,
                MARGIN + (y - self._origin[1]) * self._scale)

    def _polyline(self, points, color, width=1.5, dash=None):
        self.c.setStrokeColor(color)
        self.c.setLineWidth(width)
        self.c.setDash(*(dash or ()))
        path = self.c.beginPath()
        path.moveTo(*self._page(*points[0]))
        for x, y in points[1:]:
            path.lineTo(*self._page(x, y))
        self.c.drawPath(path, stroke=1, fill=0)
        self.c.setDash()

    def _label(self, x, y, text, dx=6, dy=6):
        px, py = self._page(x, y)
        self.c.setFillColor(LABEL_COLOR)
        self.c.setFont(self.font, LABEL_FONT_SIZE)
        self.c.drawString(px + dx, py + dy, text)

    def create_pdf(self, delta, segment=None, title=None):
        """Draw Δ and optionally the level line r_c.

        Args:
            delta: MomentPolygon
            segment: Optional LevelSegment to overlay
            title: Optional heading; defaults to n and h
        """
        logger.info(f"Creating polygon figure at {self.output_path}")
        pieces = boundary_pieces(delta)
        extent = float(np.linalg.norm(pieces[1][1] - pieces[1][0]))
        line = level_line(segment, extent) if segment is not None else None
        self._fit(pieces + ([line] if line is not None else []))

        # invariant output keeps reruns byte-identical
        self.c = canvas.Canvas(self.output_path, pagesize=(PAGE_WIDTH, PAGE_HEIGHT), invariant=1)
        self.c.setFillColor(BG_COLOR)
        self.c.rect(0, 0, PAGE_WIDTH, PAGE_HEIGHT, fill=True, stroke=False)

        for piece in pieces:
            self._polyline(piece, EDGE_COLOR)

        n = delta.params.n
        chain = pieces[0]
        edge_mids = [0.5 * (pieces[1][0] + pieces[1][1])]
        edge_mids += [0.5 * (a + b) for a, b in zip(chain[:-1], chain[1:])]
        edge_mids.append(0.5 * (pieces[2][0] + pieces[2][1]))
        for k, (x, y) in enumerate(edge_mids):
            self._label(x, y, f"l{k}", dx=-18, dy=4)

        for k, (x, y) in enumerate(delta.vertices):
            px, py = self._page(x, y)
            self.c.setFillColor(VERTEX_COLOR)
            self.c.circle(px, py, VERTEX_RADIUS, stroke=0, fill=1)
            self._label(x, y, f"v{k} ({format_float(x)}, {format_float(y)})")

        if line is not None:
            self._polyline(line, LEVEL_COLOR, width=1.0, dash=(4, 3))
            self._label(*line[-1], f"r_c, c = {format_float(segment.c)}", dx=4, dy=-12)

        heading = title or f"Moment polygon: n = {n}, h = {list(delta.params.h)}"
        self.c.setFillColor(LABEL_COLOR)
        self.c.setFont(self.font + "-Bold", TITLE_FONT_SIZE)
        self.c.drawString(MARGIN, PAGE_HEIGHT - MARGIN + TITLE_FONT_SIZE / 2, heading)

        self.c.showPage()
        self.c.save()
        logger.info(f"Polygon figure saved: {self.output_path}")


def render_polygon(delta, output_path, segment=None):
    """Write the polygon figure and return its path."""
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    PolygonFigure(path).create_pdf(delta, segment)
    return path
