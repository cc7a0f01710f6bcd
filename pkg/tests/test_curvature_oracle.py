"""Tests for lmcf_lab.curvature_oracle module."""

import math

import numpy as np
import pytest

from lmcf_lab import ale_quotient as aq
from lmcf_lab.curvature_oracle import (
    CurvatureReport,
    ImmersedPatch,
    angle_distance,
    angle_formula_sign,
    angle_gradient,
    chart_level_radius,
    flat_orbit_patch,
    induced_metric,
    lagrangian_angle_flat,
    mean_curvature_flat,
    omega_normalization,
    second_fundamental_form_flat,
    soliton_residual,
    wrap_angle,
)
from lmcf_lab.errors import DegenerateFrame
from lmcf_lab.flat_models import ShrinkerModel, TranslatorModel, shrinker_alpha_c, translator_direction
from lmcf_lab.flow_engine import SubtorusAction, ale_moment


@pytest.fixture
def round_patch():
    """F(θ, s) = √2(cos θ, sin θ)e^{is}, the shrinker (1, 1) at level 1."""
    return flat_orbit_patch(ShrinkerModel((1, 1)), 1.0)


POINTS = [(1.0, 0.5), (2.0, 3.0), (4.5, 1.2)]


def test_patch_grid_interior(round_patch):
    """Test grid points stay inside the parameter box."""
    grid = round_patch.grid((3, 4))
    assert grid.shape == (12, 2)
    (lo0, hi0), (lo1, hi1) = round_patch.box
    assert np.all((grid[:, 0] > lo0) & (grid[:, 0] < hi0))
    assert np.all((grid[:, 1] > lo1) & (grid[:, 1] < hi1))


def test_mean_curvature_round_patch(round_patch):
    """Test H = −F on the round shrinker."""
    for u in POINTS:
        H = mean_curvature_flat(round_patch, u, richardson=True)
        F = round_patch.parametrization(np.array(u))
        assert np.allclose(H, -F, atol=1e-7)


def test_second_fundamental_form_round_patch(round_patch):
    """Test |A| = √2 on the round shrinker."""
    for u in POINTS:
        assert second_fundamental_form_flat(round_patch, u) == pytest.approx(math.sqrt(2.0), rel=1e-5)


def test_shrinker_soliton_residual(round_patch):
    """Test H = α_c·F^⊥ with α_c = −1."""
    rel, _, reports = soliton_residual(round_patch, "shrinker", -1.0, POINTS)
    assert rel < 1e-4
    assert len(reports) == 3
    assert reports[0].norm == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_expander_soliton_residual():
    """Test the indefinite (1, −3) level 1 is an expander with α_c = +1."""
    model = ShrinkerModel((1, -3))
    patch = flat_orbit_patch(model, 1.0)
    alpha = shrinker_alpha_c(model, 1.0)
    assert alpha == pytest.approx(1.0)
    rel, _, _ = soliton_residual(patch, "shrinker", alpha, [(-0.8, 0.4), (0.0, 2.0), (1.1, 5.0)])
    assert rel < 1e-4


def test_minimal_soliton_residual():
    """Test Σλ = 0 levels are minimal."""
    patch = flat_orbit_patch(ShrinkerModel((1, -1)), 1.0)
    _, absolute, _ = soliton_residual(patch, "shrinker", 0.0, [(-0.5, 0.3), (0.7, 2.5)])
    assert absolute < 1e-6


def test_translator_soliton_residual():
    """Test H = u^⊥ with u = (0, −Σλ)."""
    model = TranslatorModel((1.0,))
    patch = flat_orbit_patch(model, 0.5)
    u = translator_direction(model)
    assert list(u) == [0.0, -1.0]
    rel, _, _ = soliton_residual(patch, "translator", u, [(-0.5, 0.2), (0.4, -1.0), (1.0, 0.9)])
    assert rel < 1e-4


def test_soliton_residual_unknown_kind(round_patch):
    """Test an unknown soliton kind is refused."""
    with pytest.raises(ValueError):
        soliton_residual(round_patch, "rotator", 1.0, POINTS[:1])


def test_degenerate_patch():
    """Test a patch constant in one direction is not an immersion."""
    patch = ImmersedPatch(parametrization=lambda u: np.array([u[0], u[0]], dtype=complex), dim=2,
                          box=((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(DegenerateFrame):
        mean_curvature_flat(patch, (0.5, 0.5))


def test_curvature_report_compare():
    """Test the relative error is measured against |H|."""
    report = CurvatureReport.compare(0.5, [2.0, 0.0], [2.0, 0.2])
    assert report.point == (0.5,)
    assert report.relative_error == pytest.approx(0.1)
    assert report.norm == pytest.approx(2.0)


def test_wrap_angle():
    """Test representatives lie in (−π, π]."""
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.5 + 2 * math.pi) == pytest.approx(0.5)
    assert angle_distance(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(0.2)


def test_lagrangian_angle_round_patch(round_patch):
    """Test θ = 2s − π/2 with the positive frame sign."""
    for u in POINTS:
        measured = lagrangian_angle_flat(round_patch, u)
        assert angle_distance(measured, 2 * u[1] - math.pi / 2) < 1e-8
        assert angle_formula_sign(measured, 2.0, u[1]) == 1


def test_angle_formula_sign_flipped():
    """Test an angle off by π reports the flipped frame."""
    assert angle_formula_sign(0.6 - math.pi / 2 + math.pi, 2.0, 0.3) == -1
    assert angle_formula_sign(1.0, 2.0, 0.3) is None


def test_angle_gradient_matches_mean_curvature(round_patch):
    """Test ∇θ = (0, 2) and |∇θ|_g = |H|."""
    u = (1.0, 0.5)
    grad = angle_gradient(round_patch, u)
    assert np.allclose(grad, [0.0, 2.0], atol=1e-6)
    g = induced_metric(round_patch, u)
    assert np.allclose(g, 2.0 * np.eye(2), atol=1e-8)
    assert math.sqrt(grad @ np.linalg.solve(g, grad)) == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_omega_normalization_lagrangian(round_patch):
    """Test |Ω| = 1 on an orthonormal Lagrangian frame."""
    assert omega_normalization(round_patch, (1.0, 0.5)) < 1e-8


def test_omega_normalization_complex_curve():
    """Test a complex line is far from Lagrangian."""
    patch = ImmersedPatch(parametrization=lambda u: np.array([u[0] + 1j * u[1], 0.0]), dim=2,
                          box=((0.0, 1.0), (0.0, 1.0)))
    assert omega_normalization(patch, (0.3, 0.3)) == pytest.approx(1.0, abs=1e-8)


def test_chart_level_radius_hits_level():
    """Test the root found along a chart ray lies on the requested level."""
    params = aq.AleParams(n=1, alpha=(1.0,))
    action = SubtorusAction(a=1, b=1, n=1)
    hits = []
    for theta in (0.0, math.pi / 2):
        r = chart_level_radius(params, action, 0, 1.05, theta, 2.0)
        if r is not None:
            hits.append((theta, r))
    assert len(hits) == 1
    theta, r = hits[0]
    p = aq.chart_inverse(params, 0, (r * math.cos(theta), r * math.sin(theta)))
    assert ale_moment(params, action, p) == pytest.approx(1.05, abs=1e-9)
