"""Tests for lmcf_lab.invariants module."""

import numpy as np
import pytest

from lmcf_lab import ale_quotient as aq
from lmcf_lab.config import parse_scenario
from lmcf_lab.curvature_oracle import CurvatureReport
from lmcf_lab.flat_models import ShrinkerModel, TranslatorModel, level_set_sample, shrinker_ambient
from lmcf_lab.flow_engine import IntegratorConfig, SubtorusAction, ale_ambient, integrate_flow
from lmcf_lab.invariants import (
    CheckResult,
    VerifySizes,
    VerifySummary,
    census_grid_mismatches,
    check_angle_gradient,
    check_chi_pushforward,
    check_lagrangian_angle,
    check_polygon_vertices,
    check_solitons,
    convergence_ratio,
    expected_components,
    flat_angle_patch,
    isotropy_mismatches,
    orbifold_isometry_residual,
    roundtrip_error,
    topology_mismatches,
    verify_ale,
    verify_flat,
)


@pytest.fixture
def summary():
    return VerifySummary()


def names(summary):
    return [r.name for r in summary.results]


def test_check_result_row():
    """Test the verify.csv row format."""
    row = CheckResult(name="drift_law", passed=True, measured=1e-9, threshold=1e-8, tier="integrator").row()
    assert row == ["drift_law", "true", "1e-09", "1e-08", "integrator"]


def test_verify_summary_failures():
    """Test failures are listed by name."""
    summary = VerifySummary(results=[
        CheckResult(name="a", passed=True, measured=0.0, threshold=1.0, tier="exact"),
        CheckResult(name="b", passed=False, measured=2.0, threshold=1.0, tier="exact"),
    ])
    assert not summary.passed
    assert summary.failures == ["b"]


def test_verify_summary_curvature_rows(summary):
    """Test curvature rows carry the label, |H| and the residual."""
    summary.add_curvature("probe", [CurvatureReport.compare((1.0, 0.5), [3.0, 4.0], [3.0, 4.0])])
    assert summary.curvature_rows == [["probe@1.0;0.5", "5.0", "0.0"]]


def test_check_solitons(summary):
    """Test the four calibration identities hold."""
    check_solitons(summary, 10)
    assert names(summary) == ["shrinker_identity", "expander_identity", "minimal_identity",
                              "translator_identity"]
    assert summary.passed, summary.failures
    assert len(summary.curvature_rows) == 40


def test_check_chi_pushforward(summary):
    """Test H = h_*χ on the round shrinker and skip for other models."""
    check_chi_pushforward(summary, ShrinkerModel((1, 1)), 1.0, 4)
    assert names(summary) == ["chi_equals_mean_curvature"]
    assert summary.passed
    check_chi_pushforward(summary, TranslatorModel((1.0,)), 1.0, 4)
    assert len(summary.results) == 1


def test_convergence_ratio_is_fourth_order():
    """Test halving the step divides the drift by about 16."""
    ratio, errors = convergence_ratio()
    assert errors[0] > errors[1] > 0
    assert ratio == pytest.approx(16.0, abs=3.0)


def test_flat_angle_patch_fallback():
    """Test models without a closed-form patch fall back to the round shrinker."""
    model, patch = flat_angle_patch(ShrinkerModel((2, 1, 1)), 0.5)
    assert model.weights == (1, 1)
    assert patch.dim == 2


def test_check_lagrangian_angle(summary):
    """Test θ = 2s − π/2 on the round shrinker with a single frame sign."""
    check_lagrangian_angle(summary, ShrinkerModel((1, 1)), 1.0, 8)
    result = summary.results[0]
    assert result.passed
    assert result.details["frame_sign"] in (1, -1)


def test_check_angle_gradient(summary):
    """Test |H| = |∇θ| and |Ω| = 1 on an expander patch."""
    check_angle_gradient(summary, ShrinkerModel((1, -3)), 1.0, 4)
    assert names(summary) == ["mean_curvature_angle_gradient", "omega_normalization"]
    assert summary.passed, summary.failures


def test_check_polygon_vertices(summary):
    """Test h = (0, 1, 2) gives vertices (3, 0), (1, −1), (0, −2)."""
    check_polygon_vertices(summary)
    assert summary.results[0].passed


def test_roundtrip_error():
    """Test μ_G ∘ solve_level is the identity on Δ."""
    assert roundtrip_error(5, np.random.default_rng(0)) < 1e-9


def test_orbifold_isometry_residual():
    """Test the lift from ℂ²/ℤ_{n+1} is an isometry at infinity."""
    assert orbifold_isometry_residual(2, 5, np.random.default_rng(1)) < 1e-10


def test_topology_mismatches():
    """Test genus and boundary count of the fixed surface for n ≤ 4."""
    assert topology_mismatches(4) == []


@pytest.mark.parametrize("alpha", [(1.0,), (1.0, 2.0)])
def test_isotropy_mismatches(alpha):
    """Test vertices, edges and the interior carry the expected stabilizers."""
    assert isotropy_mismatches(aq.AleParams(n=len(alpha), alpha=alpha)) == []


def test_expected_components():
    """Test the component table by endpoint parity."""
    assert expected_components(1, (0,)) == ([("++", "-+"), ("+-", "--")], "R")
    assert expected_components(2, (0,)) == ([("++", "--"), ("+-", "-+")], "R")
    assert expected_components(2, (0, 1)) == ([("++", "-+", "+-", "--")], "S1")
    assert expected_components(2, (0, 2)) == ([("++", "--"), ("+-", "-+")], "S1")


def test_census_grid_mismatches():
    """Test the census agrees with the table on a small grid."""
    assert census_grid_mismatches(max_n=2, max_a=2) == []


def test_verify_flat_quick():
    """Test the flat suite passes on the round shrinker."""
    scenario = parse_scenario({"model": {"kind": "shrinker", "weights": [1, 1]}, "c0": 1.0,
                               "horizon": 0.1, "integrator": {"step": 0.001}})
    model = ShrinkerModel((1, 1))
    seeds = level_set_sample(model, 1.0, 4, seed=0)
    trajectory = integrate_flow(shrinker_ambient(model), 1.0, 0.1, scenario.integrator, seeds)
    summary = verify_flat(scenario, model, trajectory, VerifySizes.quick())
    assert "lagrangian_pullback" in names(summary)
    assert "rk4_order" in names(summary)
    assert summary.passed, summary.failures


def test_verify_ale_without_singularity():
    """Test the ALE suite on a flow moving away from every fixed point."""
    scenario = parse_scenario({"model": {"kind": "ale", "n": 1, "alpha": [1.0], "a": 1, "b": 1},
                               "c0": -2.0, "horizon": 0.05, "fiber_samples": 4})
    params = aq.AleParams(n=1, alpha=(1.0,))
    action = SubtorusAction(a=1, b=1, n=1)
    samples = aq.ale_level_sample(params, 1, 1, -2.0, 2)
    trajectory = integrate_flow(ale_ambient(params, action), -2.0, 0.05, IntegratorConfig(step=0.01),
                                [s.point.as_array() for s in samples],
                                tags=tuple(s.sheet for s in samples))
    summary = verify_ale(scenario, params, action, trajectory,
                         VerifySizes(soliton_points=10, pullback_pairs=8, roundtrip_points=5,
                                     regular_points=2, orbifold_points=4, angle_points=4,
                                     chart_points=1, type_one_angles=2, topology_max_n=3,
                                     sign_max_a=3, sign_max_n=2))
    by_name = {r.name: r for r in summary.results}
    assert "rescaled_distance_decreasing" not in by_name
    for name in ("polygon_vertices", "fixed_surface_genus", "isotropy_census", "component_census",
                 "sign_proposition", "drift_law", "holomorphic_weight", "solve_level_roundtrip"):
        assert by_name[name].passed, name
