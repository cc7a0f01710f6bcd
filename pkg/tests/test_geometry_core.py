"""Tests for lmcf_lab.geometry_core module."""

import numpy as np
import pytest

from lmcf_lab.errors import DegenerateFrame, DimensionError, NumericalDomain
from lmcf_lab.flat_models import ShrinkerModel, TranslatorModel, shrinker_ambient, translator_ambient
from lmcf_lab.geometry_core import (
    ComplexVector,
    QuaternionicPoint,
    as_complex,
    as_real,
    check_ambient_invariants,
    check_calabi_yau_normalization,
    default_step,
    fd_directional_derivative,
    fd_partials,
    gram_matrix,
    gram_orthonormalize,
    real_inner,
    richardson_derivative,
    unitary_frame,
)


def test_complex_vector_is_read_only():
    """Test ComplexVector copies its entries and freezes them."""
    source = np.array([1.0, 2.0j])
    vec = ComplexVector(source)
    source[0] = 5.0
    assert vec.entries[0] == 1.0
    assert len(vec) == 2
    with pytest.raises(ValueError):
        vec.entries[0] = 3.0


def test_complex_vector_rejects_empty():
    """Test ComplexVector rejects an empty array."""
    with pytest.raises(DimensionError):
        ComplexVector(np.array([]))


def test_complex_vector_rejects_non_finite():
    """Test ComplexVector rejects NaN entries."""
    with pytest.raises(NumericalDomain):
        ComplexVector(np.array([1.0, np.nan]))


def test_quaternionic_point_from_array():
    """Test splitting a concatenated (z, w) array."""
    point = QuaternionicPoint.from_array([1, 2, 3j, 4j])
    assert list(point.z.entries) == [1, 2]
    assert list(point.w.entries) == [3j, 4j]
    assert len(point) == 2
    assert np.allclose(point.as_array(), [1, 2, 3j, 4j])


def test_quaternionic_point_odd_length():
    """Test odd-length arrays cannot be split."""
    with pytest.raises(DimensionError):
        QuaternionicPoint.from_array([1, 2, 3])


def test_quaternionic_point_unequal_lengths():
    """Test z and w must have the same length."""
    with pytest.raises(DimensionError):
        QuaternionicPoint(np.array([1.0]), np.array([1.0, 2.0]))


def test_real_inner_product():
    """Test g(u, v) = Re Σ u conj(v)."""
    assert real_inner([1j], [1j]) == pytest.approx(1.0)
    assert real_inner([1.0], [1j]) == pytest.approx(0.0)
    assert real_inner([1 + 1j, 2.0], [1.0, 1.0]) == pytest.approx(3.0)


def test_as_real_and_back():
    """Test the stacked real form is (Re v, Im v)."""
    v = np.array([1 + 2j, -3j])
    r = as_real(v)
    assert list(r) == [1.0, 0.0, 2.0, -3.0]
    assert np.allclose(as_complex(r), v)


def test_default_step_scales_with_point():
    """Test the default step is 1e-4·(1+|p|)."""
    assert default_step(np.array([3.0, 4.0])) == pytest.approx(6e-4)
    assert default_step(0.0) == pytest.approx(1e-4)


def test_fd_directional_derivative_scalar():
    """Test the central difference on sin."""
    value = fd_directional_derivative(np.sin, 0.3, 1.0)
    assert value == pytest.approx(np.cos(0.3), abs=1e-9)


def test_fd_directional_derivative_vector():
    """Test a directional derivative of |x|²."""
    p = np.array([1.0, 2.0])
    v = np.array([0.5, -1.0])
    value = fd_directional_derivative(lambda x: float(x @ x), p, v)
    assert value == pytest.approx(2 * p @ v, abs=1e-8)


def test_fd_directional_derivative_rejects_bad_step():
    """Test a non-positive step is refused."""
    with pytest.raises(ValueError):
        fd_directional_derivative(np.sin, 0.0, 1.0, h=0.0)


def test_fd_directional_derivative_non_finite():
    """Test non-finite stencil values raise NumericalDomain."""
    with pytest.raises(NumericalDomain):
        fd_directional_derivative(lambda x: np.array(np.inf), 0.0, 1.0)


def test_richardson_derivative():
    """Test the extrapolated derivative of exp."""
    assert richardson_derivative(np.exp, 0.7, 1.0) == pytest.approx(np.exp(0.7), rel=1e-10)


def test_fd_partials_polynomial():
    """Test first and second partials of u₀²u₁."""
    first, second = fd_partials(lambda u: u[0] ** 2 * u[1], [1.0, 2.0], 1e-3)
    assert first[0] == pytest.approx(4.0, abs=1e-6)
    assert first[1] == pytest.approx(1.0, abs=1e-6)
    assert second[0][0] == pytest.approx(4.0, abs=1e-5)
    assert second[0][1] == pytest.approx(2.0, abs=1e-5)
    assert second[1][0] == pytest.approx(2.0, abs=1e-5)
    assert second[1][1] == pytest.approx(0.0, abs=1e-5)


def test_gram_orthonormalize_gives_identity():
    """Test the orthonormalized frame has identity Gram matrix."""
    vectors = [np.array([1.0, 1.0, 0.0]), np.array([0.0, 1.0, 1.0]), np.array([1.0, 0.0, 1.0])]
    basis = gram_orthonormalize(vectors)
    assert np.allclose(gram_matrix(basis), np.eye(3), atol=1e-12)


def test_gram_orthonormalize_custom_inner():
    """Test orthonormalization under a weighted inner product."""
    weights = np.array([2.0, 5.0])
    inner = lambda u, v: float(np.sum(weights * u * v))
    basis = gram_orthonormalize([np.array([1.0, 0.0]), np.array([1.0, 1.0])], inner)
    assert np.allclose(gram_matrix(basis, inner), np.eye(2), atol=1e-12)


def test_gram_orthonormalize_degenerate():
    """Test parallel vectors raise DegenerateFrame."""
    with pytest.raises(DegenerateFrame):
        gram_orthonormalize([np.array([1.0, 2.0]), np.array([2.0, 4.0])])


def test_gram_orthonormalize_empty():
    """Test an empty frame stays empty."""
    assert gram_orthonormalize([]) == []


def test_unitary_frame_flat_normalization():
    """Test |Ω(e)| = 1 for a unitary frame of flat ℂ²."""
    model = shrinker_ambient(ShrinkerModel((1, 1)))
    p = np.array([1.0, 0.5], dtype=complex)
    frame = unitary_frame(model, p, np.random.default_rng(3))
    assert len(frame) == 2
    assert check_calabi_yau_normalization(model, p, frame) < 1e-10


def test_check_ambient_invariants_shrinker():
    """Test the contract residuals of the shrinker model are at rounding level."""
    model = shrinker_ambient(ShrinkerModel((1, -3)))
    report = check_ambient_invariants(model, np.array([1.0, 0.4 + 0.2j]), np.random.default_rng(0))
    assert report["metric_min_eig"] == pytest.approx(1.0)
    assert report["metric_symmetry"] < 1e-14
    assert report["I_squared"] < 1e-14
    assert report["omega_antisymmetry"] < 1e-12
    assert report["omega_compatibility"] < 1e-12
    assert report["moment_identity"] < 1e-8


def test_check_ambient_invariants_translator():
    """Test the moment identity for the translating action."""
    model = translator_ambient(TranslatorModel((1.0, 2.0)))
    report = check_ambient_invariants(model, np.array([0.3, -0.7, 1.1 + 0.5j]),
                                      np.random.default_rng(1))
    assert report["moment_identity"] < 1e-8
    assert report["omega_compatibility"] < 1e-12
