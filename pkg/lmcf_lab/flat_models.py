"""Flat model families on ℂ^d.

The weighted circle action z ↦ (z_j e^{iλ_j s}) gives self-shrinkers and
self-expanders. The ℝ-action on ℂ^{d+1}, which also translates the last
coordinate, gives translating solitons. Each family is packaged as an
AmbientModel with closed-form χ.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DimensionError, EmptyLevel, OutsideDomain
from .geometry_core import AmbientModel, real_inner
from .utils import setup_logging

logger = setup_logging()

# Hyperbolic parameter range used to sample non-compact shrinker levels
HYPERBOLIC_SPAN = 2.0
# Half-width of the graph box used to sample translator levels
GRAPH_SPAN = 2.0


@dataclass(frozen=True)
class ShrinkerModel:
    """Weighted circle action on ℂ^d with nonzero integer weights."""

    weights: Tuple[int, ...]

    def __post_init__(self):
        weights = tuple(self.weights)
        if len(weights) < 1:
            raise ValueError("ShrinkerModel needs at least one weight")
        for w in weights:
            if isinstance(w, bool) or int(w) != w or w == 0:
                raise ValueError(f"shrinker weights must be nonzero integers, got {w!r}")
        object.__setattr__(self, "weights", tuple(int(w) for w in weights))

    @property
    def d(self):
        return len(self.weights)


@dataclass(frozen=True)
class TranslatorModel:
    """ℝ-action on ℂ^{d+1}: weights on the first d coordinates, translation on the last."""

    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if not all(np.isfinite(weights)):
            raise ValueError("translator weights must be finite")
        object.__setattr__(self, "weights", weights)

    @property
    def d(self):
        return len(self.weights)


def _lam(model):
    return np.asarray(model.weights, dtype=float)


def _check_len(vec, expected):
    vec = np.asarray(vec)
    if vec.ndim != 1 or vec.size != expected:
        raise DimensionError(f"expected a vector of length {expected}", got=list(vec.shape))
    return vec


def shrinker_moment(model, z):
    """½ Σ λ_i |z_i|²."""
    z = _check_len(z, model.d)
    return 0.5 * float(np.sum(_lam(model) * np.abs(z) ** 2))


def shrinker_aH(model):
    """Σ λ_i."""
    return float(sum(model.weights))


def shrinker_chi(model, x):
    """χ_x = (−Σλ / Σλ²x²)·(λ_1 x_1, …, λ_d x_d) on L = ℝ^d minus the origin.

    Raises:
        OutsideDomain: At x = 0
    """
    x = np.asarray(_check_len(x, model.d), dtype=float)
    lam = _lam(model)
    denom = float(np.sum(lam ** 2 * x ** 2))
    if denom == 0.0:
        raise OutsideDomain("L excludes the origin")
    return -lam.sum() / denom * lam * x


def shrinker_alpha_c(model, c):
    """α_c = −Σλ / (2c); negative for shrinkers, positive for expanders.

    Raises:
        OutsideDomain: At the cone level c = 0
    """
    if c == 0:
        raise OutsideDomain("the cone level c = 0 is singular")
    return -shrinker_aH(model) / (2.0 * float(c))


def classify_soliton(alpha_c):
    """Name the soliton type for a given α_c."""
    if alpha_c < 0:
        return "shrinker"
    if alpha_c > 0:
        return "expander"
    return "minimal"


def translator_moment(model, z):
    """½ Σ λ_i |z_i|² + Re z_{d+1}."""
    z = _check_len(z, model.d + 1)
    lam = _lam(model)
    return 0.5 * float(np.sum(lam * np.abs(z[:-1]) ** 2)) + float(np.real(z[-1]))


def translator_aH(model):
    """Σ λ_i."""
    return float(sum(model.weights))


def translator_chi(model, x):
    """χ_x = (−Σλ / (1 + Σλ²x²))·(λ_1 x_1, …, λ_d x_d, 1)."""
    x = np.asarray(_check_len(x, model.d + 1), dtype=float)
    lam = _lam(model)
    factor = -lam.sum() / (1.0 + float(np.sum(lam ** 2 * x[:-1] ** 2)))
    return factor * np.append(lam * x[:-1], 1.0)


def translator_direction(model):
    """Translation velocity u = (0, …, 0, −Σλ)."""
    u = np.zeros(model.d + 1)
    u[-1] = -translator_aH(model)
    return u


def _subspace_directions(dim, count, rng):
    """Unit directions in ℝ^dim: evenly spaced on circles, random otherwise."""
    if dim == 1:
        return np.where(rng.random(count) < 0.5, -1.0, 1.0).reshape(count, 1)
    if dim == 2:
        phase = rng.uniform(0.0, 2.0 * np.pi)
        theta = phase + 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _shrinker_level_points(model, c, count, rng):
    lam = _lam(model)
    pos = np.flatnonzero(lam > 0)
    neg = np.flatnonzero(lam < 0)
    if c == 0:
        raise OutsideDomain("the cone level c = 0 is rejected")
    if c > 0 and pos.size == 0:
        raise EmptyLevel(f"level {c} is empty: all weights negative")
    if c < 0 and neg.size == 0:
        raise EmptyLevel(f"level {c} is empty: all weights positive")

    # x = cosh(s)·√|c|·u_major + sinh(s)·√|c|·u_minor with u on the unit ellipsoids ½Σ|λ|u² = 1
    major, minor = (pos, neg) if c > 0 else (neg, pos)
    root = np.sqrt(abs(c))
    pts = np.zeros((count, model.d))
    dirs_major = _subspace_directions(major.size, count, rng)
    pts[:, major] = root * dirs_major * np.sqrt(2.0 / np.abs(lam[major]))
    if minor.size:
        s = rng.uniform(-HYPERBOLIC_SPAN, HYPERBOLIC_SPAN, count)
        dirs_minor = _subspace_directions(minor.size, count, rng)
        pts[:, major] *= np.cosh(s)[:, None]
        pts[:, minor] = root * np.sinh(s)[:, None] * dirs_minor * np.sqrt(2.0 / np.abs(lam[minor]))
    return pts


def _translator_level_points(model, c, count, rng):
    d = model.d
    if d == 0:
        return np.full((count, 1), float(c))
    if d == 1:
        base = np.linspace(-GRAPH_SPAN, GRAPH_SPAN, count).reshape(count, 1)
    else:
        base = rng.uniform(-GRAPH_SPAN, GRAPH_SPAN, (count, d))
    last = c - 0.5 * np.sum(_lam(model) * base ** 2, axis=1)
    return np.column_stack([base, last])


def level_set_sample(model, c, count, seed=0):
    """Deterministic sample of V_c = μ_H⁻¹(c) ∩ L on the real slice.

    Args:
        model: ShrinkerModel or TranslatorModel
        c: Level value
        count: Number of points
        seed: Seed for the sampling generator

    Returns:
        list: ``count`` complex arrays with zero imaginary part

    Raises:
        EmptyLevel: If V_c is empty
        OutsideDomain: For the shrinker cone level c = 0
    """
    rng = np.random.default_rng(seed)
    if isinstance(model, ShrinkerModel):
        pts = _shrinker_level_points(model, float(c), count, rng)
    elif isinstance(model, TranslatorModel):
        pts = _translator_level_points(model, float(c), count, rng)
    else:
        raise TypeError(f"unsupported model {model!r}")
    logger.debug(f"Sampled {count} points on level {c} of {model}")
    return [p.astype(complex) for p in pts]


def level_parametrization(model, c):
    """Smooth parametrization of V_c for curvature patches.

    Shrinker with d=2 and a single sign: angle θ ↦ ellipse point. Mixed signs
    with d=2: hyperbolic parameter on the branch through +x_major. Translator:
    graph over (x_1, …, x_d).

    Returns:
        tuple: (callable taking a real parameter vector, parameter dimension)
    """
    if isinstance(model, TranslatorModel):
        lam = _lam(model)

        def graph(u):
            u = np.asarray(u, dtype=float)
            return np.append(u, c - 0.5 * float(np.sum(lam * u ** 2))).astype(complex)

        return graph, model.d

    lam = _lam(model)
    if model.d != 2:
        raise DimensionError("closed-form shrinker parametrization is provided for d = 2")
    if c == 0:
        raise OutsideDomain("the cone level c = 0 is rejected")
    signs = np.sign(lam)
    scale = np.sqrt(2.0 * abs(c) / np.abs(lam))
    if signs[0] == signs[1]:
        if np.sign(c) != signs[0]:
            raise EmptyLevel(f"level {c} is empty for weights {model.weights}")

        def ellipse(u):
            th = float(np.asarray(u).ravel()[0])
            return np.array([scale[0] * np.cos(th), scale[1] * np.sin(th)], dtype=complex)

        return ellipse, 1

    major = 0 if np.sign(c) == signs[0] else 1
    minor = 1 - major

    def hyperbola(u):
        s = float(np.asarray(u).ravel()[0])
        x = np.zeros(2)
        x[major] = scale[major] * np.cosh(s)
        x[minor] = scale[minor] * np.sinh(s)
        return x.astype(complex)

    return hyperbola, 1


def _flat_omega(u, v):
    return real_inner(1j * np.asarray(u), v)


def _flat_basis(dim):
    eye = np.eye(dim, dtype=complex)
    return [e for e in eye] + [1j * e for e in eye]


def shrinker_ambient(model):
    """Package the weighted circle action on flat ℂ^d as an AmbientModel."""
    lam = _lam(model)

    def generator(p, xi):
        return 1j * xi * lam * np.asarray(p)

    def act(p, s):
        return np.asarray(p) * np.exp(1j * lam * s)

    return AmbientModel(
        name=f"shrinker{tuple(model.weights)}",
        dim_real=2 * model.d,
        metric_at=lambda p, u, v: real_inner(u, v),
        cplx_I1_at=lambda p, v: 1j * np.asarray(v),
        omega1_at=lambda p, u, v: _flat_omega(u, v),
        hol_volume_at=lambda p, frame: complex(np.linalg.det(np.column_stack(frame))),
        action_generator_at=generator,
        moment_at=lambda p: 0.5 * float(np.sum(lam * np.abs(np.asarray(p)) ** 2)),
        a_H=shrinker_aH(model),
        tangent_basis_at=lambda p: _flat_basis(model.d),
        act=act,
    )


def translator_ambient(model):
    """Package the translating ℝ-action on flat ℂ^{d+1} as an AmbientModel."""
    lam = _lam(model)
    full = np.append(lam, 0.0)
    shift = np.zeros(model.d + 1, dtype=complex)
    shift[-1] = 1j

    def generator(p, xi):
        return xi * (1j * full * np.asarray(p) + shift)

    def act(p, s):
        return np.asarray(p) * np.exp(1j * full * s) + s * shift

    def moment(p):
        p = np.asarray(p)
        return 0.5 * float(np.sum(lam * np.abs(p[:-1]) ** 2)) + float(np.real(p[-1]))

    return AmbientModel(
        name=f"translator{tuple(model.weights)}",
        dim_real=2 * (model.d + 1),
        metric_at=lambda p, u, v: real_inner(u, v),
        cplx_I1_at=lambda p, v: 1j * np.asarray(v),
        omega1_at=lambda p, u, v: _flat_omega(u, v),
        hol_volume_at=lambda p, frame: complex(np.linalg.det(np.column_stack(frame))),
        action_generator_at=generator,
        moment_at=moment,
        a_H=translator_aH(model),
        tangent_basis_at=lambda p: _flat_basis(model.d + 1),
        act=act,
    )
