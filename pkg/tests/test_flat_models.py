"""Tests for lmcf_lab.flat_models module."""

import numpy as np
import pytest

from lmcf_lab.errors import DimensionError, EmptyLevel, OutsideDomain
from lmcf_lab.flat_models import (
    ShrinkerModel,
    TranslatorModel,
    classify_soliton,
    level_parametrization,
    level_set_sample,
    shrinker_aH,
    shrinker_alpha_c,
    shrinker_ambient,
    shrinker_chi,
    shrinker_moment,
    translator_aH,
    translator_ambient,
    translator_chi,
    translator_direction,
    translator_moment,
)


def test_shrinker_model_rejects_zero_weight():
    """Test zero weights are refused."""
    with pytest.raises(ValueError):
        ShrinkerModel((1, 0))


def test_shrinker_model_rejects_fractional_weight():
    """Test weights must be integers."""
    with pytest.raises(ValueError):
        ShrinkerModel((1.5, 1))


def test_shrinker_model_rejects_empty():
    """Test at least one weight is needed."""
    with pytest.raises(ValueError):
        ShrinkerModel(())


def test_shrinker_moment():
    """Test μ = ½ Σ λ|z|²."""
    model = ShrinkerModel((1, -3))
    assert shrinker_moment(model, np.array([2.0, 1j])) == pytest.approx(0.5 * (4 - 3))


def test_shrinker_moment_wrong_length():
    """Test vectors of the wrong length raise DimensionError."""
    with pytest.raises(DimensionError):
        shrinker_moment(ShrinkerModel((1, 1)), np.array([1.0]))


def test_shrinker_aH_and_alpha():
    """Test a_H = Σλ and α_c = −Σλ/(2c)."""
    model = ShrinkerModel((1, 1))
    assert shrinker_aH(model) == 2.0
    assert shrinker_alpha_c(model, 1.0) == pytest.approx(-1.0)
    assert shrinker_alpha_c(ShrinkerModel((1, -3)), 1.0) == pytest.approx(1.0)


def test_shrinker_alpha_at_cone_level():
    """Test the cone level is singular."""
    with pytest.raises(OutsideDomain):
        shrinker_alpha_c(ShrinkerModel((1, 1)), 0.0)


def test_classify_soliton():
    """Test soliton names by the sign of α."""
    assert classify_soliton(-1.0) == "shrinker"
    assert classify_soliton(1.0) == "expander"
    assert classify_soliton(0.0) == "minimal"


def test_shrinker_chi_formula():
    """Test χ = −Σλ/(Σλ²x²)·λx."""
    model = ShrinkerModel((1, 1))
    chi = shrinker_chi(model, np.array([1.0, 1.0]))
    assert np.allclose(chi, [-1.0, -1.0])


def test_shrinker_chi_at_origin():
    """Test the origin is excluded."""
    with pytest.raises(OutsideDomain):
        shrinker_chi(ShrinkerModel((1, 1)), np.zeros(2))


@pytest.mark.parametrize("weights,c", [((1, 1), 1.0), ((1, -3), 1.0), ((1, -3), -2.0), ((2, 1, 1), 0.5)])
def test_shrinker_level_sample_on_level(weights, c):
    """Test sampled points lie on V_c and on the real slice."""
    model = ShrinkerModel(weights)
    points = level_set_sample(model, c, 12, seed=4)
    assert len(points) == 12
    for p in points:
        assert np.all(p.imag == 0)
        assert shrinker_moment(model, p) == pytest.approx(c, abs=1e-12)


def test_shrinker_level_sample_deterministic():
    """Test the same seed gives the same points."""
    model = ShrinkerModel((1, -3))
    first = level_set_sample(model, 1.0, 5, seed=9)
    second = level_set_sample(model, 1.0, 5, seed=9)
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


def test_shrinker_level_sample_empty():
    """Test a definite model has no negative levels."""
    with pytest.raises(EmptyLevel):
        level_set_sample(ShrinkerModel((1, 1)), -1.0, 4)


def test_shrinker_level_sample_cone_level():
    """Test the cone level is rejected."""
    with pytest.raises(OutsideDomain):
        level_set_sample(ShrinkerModel((1, -1)), 0.0, 4)


def test_translator_moment_and_direction():
    """Test μ = ½Σλ|z|² + Re z_last and u = (0, …, −Σλ)."""
    model = TranslatorModel((1.0, 1.0))
    assert translator_moment(model, np.array([1.0, 1.0, 0.5 + 2j])) == pytest.approx(1.5)
    assert translator_aH(model) == 2.0
    assert list(translator_direction(model)) == [0.0, 0.0, -2.0]


def test_translator_chi_formula():
    """Test χ = −Σλ/(1+Σλ²x²)·(λx, 1)."""
    model = TranslatorModel((1.0,))
    chi = translator_chi(model, np.array([1.0, 0.0]))
    assert np.allclose(chi, [-0.5, -0.5])


def test_translator_level_sample_on_level():
    """Test translator samples are graphs over the level."""
    model = TranslatorModel((1.0, 2.0))
    for p in level_set_sample(model, 0.3, 10, seed=1):
        assert translator_moment(model, p) == pytest.approx(0.3, abs=1e-12)


def test_translator_zero_weights_sample():
    """Test d = 0 gives the single point x = c."""
    points = level_set_sample(TranslatorModel(()), 0.7, 3)
    assert all(np.allclose(p, [0.7]) for p in points)


def test_level_parametrization_ellipse():
    """Test the ellipse parametrization stays on the level."""
    model = ShrinkerModel((1, 2))
    curve, dim = level_parametrization(model, 1.5)
    assert dim == 1
    for th in np.linspace(0.0, 6.0, 7):
        assert shrinker_moment(model, curve([th])) == pytest.approx(1.5, abs=1e-12)


def test_level_parametrization_hyperbola():
    """Test the hyperbolic branch stays on the level."""
    model = ShrinkerModel((1, -3))
    curve, dim = level_parametrization(model, -2.0)
    for s in (-1.0, 0.0, 0.8):
        assert shrinker_moment(model, curve([s])) == pytest.approx(-2.0, abs=1e-12)


def test_level_parametrization_empty_level():
    """Test an empty level cannot be parametrized."""
    with pytest.raises(EmptyLevel):
        level_parametrization(ShrinkerModel((1, 1)), -1.0)


def test_level_parametrization_translator_graph():
    """Test the translator graph parametrization."""
    model = TranslatorModel((1.0,))
    graph, dim = level_parametrization(model, 2.0)
    assert dim == 1
    assert np.allclose(graph([1.0]), [1.0, 1.5])


def test_shrinker_ambient_action_preserves_moment():
    """Test the circle action preserves μ_H."""
    ambient = shrinker_ambient(ShrinkerModel((1, -3)))
    p = np.array([1.2, 0.4 + 0.1j])
    assert ambient.moment_at(ambient.act(p, 0.7)) == pytest.approx(ambient.moment_at(p), abs=1e-12)
    assert ambient.a_H == -2.0
    assert ambient.project is None


def test_translator_ambient_action_shifts_last_coordinate():
    """Test the ℝ-action translates the last coordinate along i."""
    ambient = translator_ambient(TranslatorModel((1.0,)))
    p = np.array([0.5, 0.25])
    q = ambient.act(p, 0.3)
    assert q[-1] == pytest.approx(0.25 + 0.3j)
    assert ambient.moment_at(q) == pytest.approx(ambient.moment_at(p), abs=1e-12)
