"""Shared numerical substrate: vectors, frames, finite differences and the ambient-model contract.

Points and tangent vectors are complex numpy arrays. A real tangent vector of
ℂ^N is stored as a complex array of length N; ``as_real``/``as_complex``
switch to the stacked ℝ^{2N} form when real linear algebra is needed.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateFrame, DimensionError, NumericalDomain
from .utils import setup_logging

logger = setup_logging()

# Frames whose smallest Gram eigenvalue falls below this fraction of the largest are degenerate
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ComplexVector:
    """Finite complex vector such as z ∈ ℂ^{n+1}."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError("ComplexVector must be a non-empty 1-d array", shape=list(arr.shape))
        if not np.all(np.isfinite(arr)):
            raise NumericalDomain("ComplexVector has non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def length(self):
        return self.entries.size

    def __len__(self):
        return self.entries.size


@dataclass(frozen=True)
class QuaternionicPoint:
    """A point (z, w) of ℍ^{n+1} = ℂ^{n+1} ⊕ ℂ^{n+1}."""

    z: ComplexVector
    w: ComplexVector

    def __post_init__(self):
        if not isinstance(self.z, ComplexVector):
            object.__setattr__(self, "z", ComplexVector(self.z))
        if not isinstance(self.w, ComplexVector):
            object.__setattr__(self, "w", ComplexVector(self.w))
        if len(self.z) != len(self.w):
            raise DimensionError("z and w must have equal lengths", z=len(self.z), w=len(self.w))

    @classmethod
    def from_array(cls, arr):
        """Split a concatenated (z, w) array."""
        arr = np.asarray(arr, dtype=complex)
        if arr.size % 2:
            raise DimensionError("concatenated (z, w) must have even length", length=arr.size)
        half = arr.size // 2
        return cls(ComplexVector(arr[:half]), ComplexVector(arr[half:]))

    def as_array(self):
        """Concatenated (z, w) as a fresh complex array."""
        return np.concatenate([self.z.entries, self.w.entries])

    def __len__(self):
        return len(self.z)


@dataclass(frozen=True)
class AmbientModel:
    """Calabi-Yau stage with a one-dimensional abelian action and its moment map.

    Every geometric quantity is an evaluator, a pure function of its arguments.
    Points and vectors use the backend's native complex arrays. ``moment_at``
    returns the coefficient of μ_H in the dual basis, and ``a_H`` is the
    matching scalar.

    ``tangent_basis_at`` returns a real basis of the tangent space at a point.
    It is only used for invariant checks. ``act`` applies the group element
    with parameter s. ``project`` maps a nearby point back onto the
    constraint set and is None for flat backends.
    """

    name: str
    dim_real: int
    metric_at: Callable
    cplx_I1_at: Callable
    omega1_at: Callable
    hol_volume_at: Callable
    action_generator_at: Callable
    moment_at: Callable
    a_H: float
    tangent_basis_at: Callable
    act: Optional[Callable] = None
    project: Optional[Callable] = None


def real_inner(u, v):
    """Flat real inner product Re Σ u_i conj(v_i)."""
    return float(np.real(np.vdot(np.asarray(v), np.asarray(u))))


def as_real(v):
    """Stack a complex vector into ℝ^{2N} as (Re v, Im v)."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def as_complex(r):
    """Inverse of ``as_real``."""
    r = np.asarray(r, dtype=float)
    half = r.size // 2
    return r[:half] + 1j * r[half:]


def default_step(p):
    """Finite-difference step 1e-4·(1+|p|)."""
    return 1e-4 * (1.0 + float(np.linalg.norm(np.atleast_1d(p))))


def _checked(value):
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise NumericalDomain("non-finite value in finite-difference stencil")
    return value


def fd_directional_derivative(f, p, v, h=None):
    """Fourth-order central difference of f at p along v.

    Args:
        f: Scalar- or array-valued evaluator
        p: Base point (scalar or array)
        v: Direction, same shape as p
        h: Step (default 1e-4·(1+|p|))

    Returns:
        Derivative estimate with the shape of f's output

    Raises:
        NumericalDomain: If f is non-finite on the stencil
    """
    if h is None:
        h = default_step(p)
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    p = np.asarray(p) if np.ndim(p) else p
    v = np.asarray(v) if np.ndim(v) else v
    f_p2 = _checked(f(p + 2 * h * v))
    f_p1 = _checked(f(p + h * v))
    f_m1 = _checked(f(p - h * v))
    f_m2 = _checked(f(p - 2 * h * v))
    return (-f_p2 + 8 * f_p1 - 8 * f_m1 + f_m2) / (12.0 * h)


def richardson_derivative(f, p, v, h=None):
    """Richardson-extrapolated directional derivative from steps h and h/2."""
    if h is None:
        h = default_step(p)
    coarse = fd_directional_derivative(f, p, v, h)
    fine = fd_directional_derivative(f, p, v, h / 2.0)
    return (16.0 * fine - coarse) / 15.0


def fd_partials(F, u, h):
    """First and second partial derivatives of F: ℝ^m → array via 4th-order stencils.

    Args:
        F: Evaluator taking a real parameter vector
        u: Parameter point
        h: Step

    Returns:
        tuple: (first, second) where first[i] = ∂_i F and second[i][j] = ∂_i∂_j F
    """
    u = np.asarray(u, dtype=float)
    m = u.size
    eye = np.eye(m)
    f0 = _checked(np.asarray(F(u)))
    first = []
    second = [[None] * m for _ in range(m)]
    for i in range(m):
        ei = eye[i]
        fp1 = _checked(np.asarray(F(u + h * ei)))
        fm1 = _checked(np.asarray(F(u - h * ei)))
        fp2 = _checked(np.asarray(F(u + 2 * h * ei)))
        fm2 = _checked(np.asarray(F(u - 2 * h * ei)))
        first.append((-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12.0 * h))
        second[i][i] = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12.0 * h * h)
    for i in range(m):
        for j in range(i + 1, m):
            # fourth-order mixed stencil: derivative along i of the derivative along j
            def d_j(x, j=j):
                return fd_directional_derivative(F, x, eye[j], h)
            second[i][j] = fd_directional_derivative(d_j, u, eye[i], h)
            second[j][i] = second[i][j]
    return first, second


def gram_orthonormalize(vectors, inner=None):
    """Orthonormalize vectors with respect to a bilinear form.

    Args:
        vectors: Sequence of vectors
        inner: Symmetric bilinear evaluator (default: flat real inner product)

    Returns:
        list: Orthonormal vectors spanning the same space

    Raises:
        DegenerateFrame: If the Gram matrix is rank deficient
    """
    inner = inner or real_inner
    vecs = [np.asarray(v) for v in vectors]
    if not vecs:
        return []
    k = len(vecs)
    gram = np.array([[inner(vecs[i], vecs[j]) for j in range(k)] for i in range(k)])
    eig = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    if eig[-1] <= 0 or eig[0] <= RANK_TOL * eig[-1]:
        raise DegenerateFrame("frame is rank deficient", min_eig=float(eig[0]), max_eig=float(eig[-1]))

    basis = []
    for v in vecs:
        w = v.astype(complex if np.iscomplexobj(v) else float)
        # two passes keep the Gram matrix at identity to rounding
        for _ in range(2):
            for e in basis:
                w = w - inner(w, e) * e
        norm = np.sqrt(inner(w, w))
        basis.append(w / norm)
    return basis


def gram_matrix(vectors, inner=None):
    """Gram matrix of vectors under inner."""
    inner = inner or real_inner
    k = len(vectors)
    return np.array([[inner(vectors[i], vectors[j]) for j in range(k)] for i in range(k)])


def check_calabi_yau_normalization(model, p, frame):
    """Residual | |Ω(frame)| − 1 | for a unitary frame.

    Args:
        model: AmbientModel
        p: Point
        frame: n tangent vectors e_1..e_n with {e_j, I e_j} orthonormal

    Returns:
        float: Normalization residual
    """
    return abs(abs(model.hol_volume_at(p, frame)) - 1.0)


def unitary_frame(model, p, rng=None):
    """Build a unitary frame at p from the model's tangent basis.

    Picks e_1, then e_2 orthogonal to e_1 and I e_1, and so on, optionally
    after a random rotation of the basis.
    """
    basis = [np.asarray(b) for b in model.tangent_basis_at(p)]
    if rng is not None:
        coeffs = rng.standard_normal((len(basis), len(basis)))
        basis = [sum(c * b for c, b in zip(row, basis)) for row in coeffs]
    inner = lambda u, v: model.metric_at(p, u, v)
    frame = []
    span = []
    for b in basis:
        if len(frame) * 2 >= model.dim_real:
            break
        w = np.asarray(b, dtype=complex)
        for _ in range(2):
            for e in span:
                w = w - inner(w, e) * e
        norm = np.sqrt(max(inner(w, w), 0.0))
        if norm < 1e-8:
            continue
        e = w / norm
        Ie = model.cplx_I1_at(p, e)
        frame.append(e)
        span.extend([e, Ie])
    return frame


def check_ambient_invariants(model, p, rng, xi=1.0):
    """Pointwise residuals of the ambient-model contract.

    Args:
        model: AmbientModel
        p: Sample point
        rng: numpy Generator for random tangent vectors
        xi: Lie algebra element (scalar) for the moment identity

    Returns:
        dict: min metric eigenvalue, symmetry, I² residual, ω antisymmetry,
        ω/g compatibility and moment-identity residual
    """
    basis = [np.asarray(b) for b in model.tangent_basis_at(p)]
    metric = lambda u, v: model.metric_at(p, u, v)
    gram = gram_matrix(basis, metric)
    min_eig = float(np.linalg.eigvalsh(0.5 * (gram + gram.T))[0])
    symmetry = float(np.max(np.abs(gram - gram.T)))

    def random_tangent():
        c = rng.standard_normal(len(basis))
        return sum(ci * b for ci, b in zip(c, basis))

    u, v = random_tangent(), random_tangent()
    I_sq = model.cplx_I1_at(p, model.cplx_I1_at(p, u)) + u
    i_residual = float(np.linalg.norm(I_sq)) / max(float(np.linalg.norm(u)), 1e-300)
    antisym = abs(model.omega1_at(p, u, v) + model.omega1_at(p, v, u))
    compat = abs(model.omega1_at(p, u, v) - model.metric_at(p, model.cplx_I1_at(p, u), v))

    gen = model.action_generator_at(p, xi)
    lhs = fd_directional_derivative(lambda q: xi * model.moment_at(q), np.asarray(p), v)
    rhs = -model.omega1_at(p, gen, v)
    moment = abs(float(np.real(lhs)) - rhs)

    return {
        "metric_min_eig": min_eig,
        "metric_symmetry": symmetry,
        "I_squared": i_residual,
        "omega_antisymmetry": antisym,
        "omega_compatibility": compat,
        "moment_identity": moment,
    }
