"""Finite-difference mean curvature, second fundamental form and Lagrangian angle.

Two tiers: flat backends (fourth-order stencils, Richardson-extrapolated on
request) and the ALE chart, where the metric itself is sampled from
horizontal lifts and Christoffel symbols come from differencing it.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from . import ale_quotient as aq
from .errors import DegenerateFrame, NumericalDomain, OutsideChart
from .geometry_core import as_complex, as_real, fd_directional_derivative, fd_partials
from .utils import setup_logging

logger = setup_logging()

FLAT_TIER = 1e-4
CHART_TIER = 1e-2
REL_FLOOR = 1e-12
IMMERSION_TOL = 1e-8


@dataclass(frozen=True)
class ImmersedPatch:
    """Parametrised piece of an immersion u ∈ ℝ^m ↦ point.

    For flat patches the point is in ℂ^N. For chart patches it is (u₁, u₂)
    in the chart around P_{k0} of ``params``.
    """

    parametrization: Callable
    dim: int
    box: Tuple[Tuple[float, float], ...] = ()
    params: Optional[aq.AleParams] = None
    k0: Optional[int] = None
    step: float = 1e-3

    @property
    def chart(self):
        return self.params is not None

    def real_map(self, u):
        return as_real(self.parametrization(np.asarray(u, dtype=float)))

    def grid(self, counts):
        """Tensor grid of interior points of the domain box."""
        axes = [lo + (hi - lo) * (np.arange(c) + 0.5) / c for (lo, hi), c in zip(self.box, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class CurvatureReport:
    point: Tuple[float, ...]
    mean_curvature_vec: np.ndarray
    comparison_vec: np.ndarray
    relative_error: float

    @classmethod
    def compare(cls, u, H, cmp):
        H = np.asarray(H)
        cmp = np.asarray(cmp)
        err = float(np.linalg.norm(H - cmp)) / max(float(np.linalg.norm(H)), REL_FLOOR)
        return cls(point=tuple(float(v) for v in np.atleast_1d(u)), mean_curvature_vec=H,
                   comparison_vec=cmp, relative_error=err)

    @property
    def norm(self):
        return float(np.linalg.norm(self.mean_curvature_vec))


def _frame(first):
    T = np.column_stack(first)
    s = np.linalg.svd(T, compute_uv=False)
    if s[-1] <= IMMERSION_TOL * max(1.0, s[0]):
        raise DegenerateFrame("patch is not an immersion here", sigma_min=float(s[-1]))
    return T


def _normal_part(T, G, v):
    """Component of v orthogonal (in the metric G) to the columns of T."""
    h = T.T @ G @ T
    return v - T @ np.linalg.solve(h, T.T @ G @ v)


def _flat_derivatives(patch, u, h):
    return fd_partials(patch.real_map, u, h)


def mean_curvature_flat(patch, u, richardson=False):
    """H = g^{ij}(∂_i∂_j F)^⊥ in a flat ambient space.

    Raises:
        DegenerateFrame: If the tangent frame is rank deficient
    """
    u = np.asarray(u, dtype=float)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))

    def estimate(step):
        first, second = _flat_derivatives(patch, u, step)
        T = _frame(first)
        G = np.eye(T.shape[0])
        ginv = np.linalg.inv(T.T @ T)
        acc = sum(ginv[i, j] * second[i][j] for i in range(patch.dim) for j in range(patch.dim))
        return _normal_part(T, G, acc)

    H = estimate(h)
    if richardson:
        # stencils are fourth order in the step
        H = (16.0 * estimate(h / 2.0) - H) / 15.0
    return as_complex(H)


def second_fundamental_form_flat(patch, u):
    """|A| at u in a flat ambient space."""
    u = np.asarray(u, dtype=float)
    first, second = _flat_derivatives(patch, u, patch.step * (1.0 + float(np.linalg.norm(u))))
    T = _frame(first)
    return _second_form_norm(T, np.eye(T.shape[0]), second, patch.dim)


def _second_form_norm(T, G, acc, m):
    hinv = np.linalg.inv(T.T @ G @ T)
    normals = [[_normal_part(T, G, acc[i][j]) for j in range(m)] for i in range(m)]
    total = 0.0
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for l in range(m):
                    total += hinv[i, k] * hinv[j, l] * float(normals[i][j] @ G @ normals[k][l])
    return math.sqrt(max(total, 0.0))


# ---------------------------------------------------------------------------
# Chart tier
# ---------------------------------------------------------------------------

def _chart_metric_real(params, k0, x):
    try:
        return aq.chart_metric(params, k0, as_complex(x))
    except NumericalDomain as e:
        raise OutsideChart(f"stencil left the chart around P_{k0}: {e}", point=list(map(float, x)))


def christoffel_symbols(params, k0, x, h=1e-4):
    """Γ^a_{bc} of the sampled chart metric at real chart coordinates x."""
    x = np.asarray(x, dtype=float)
    G = _chart_metric_real(params, k0, x)
    eye = np.eye(4)
    dG = [fd_directional_derivative(lambda y: _chart_metric_real(params, k0, y), x, eye[d], h)
          for d in range(4)]
    Ginv = np.linalg.inv(G)
    gamma = np.zeros((4, 4, 4))
    for b in range(4):
        for c in range(4):
            lower = np.array([dG[b][d, c] + dG[c][d, b] - dG[d][b, c] for d in range(4)])
            gamma[:, b, c] = 0.5 * Ginv @ lower
    return G, gamma


def _chart_geometry(patch, u):
    u = np.asarray(u, dtype=float)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))
    first, second = fd_partials(patch.real_map, u, h)
    T = _frame(first)
    x = patch.real_map(u)
    G, gamma = christoffel_symbols(patch.params, patch.k0, x)
    m = patch.dim
    acc = [[second[i][j] + np.einsum("abc,b,c->a", gamma, first[i], first[j]) for j in range(m)]
           for i in range(m)]
    return T, G, acc


def mean_curvature_chart(patch, u):
    """H = h^{ij}(∂_i∂_j F + Γ(∂_i F, ∂_j F))^⊥ in chart coordinates, returned in ℂ².

    Accuracy is of order CHART_TIER since the metric is itself sampled.

    Raises:
        OutsideChart: If a stencil point cannot be mapped back to M(α,0)
    """
    T, G, acc = _chart_geometry(patch, u)
    hinv = np.linalg.inv(T.T @ G @ T)
    m = patch.dim
    total = sum(hinv[i, j] * acc[i][j] for i in range(m) for j in range(m))
    return as_complex(_normal_part(T, G, total))


def second_fundamental_form_chart(patch, u):
    """|A| at u measured with the chart metric."""
    T, G, acc = _chart_geometry(patch, u)
    return _second_form_norm(T, G, acc, patch.dim)


def chart_level_radius(params, action, k0, c, theta, r_max):
    """Radius r with μ_H(φ⁻¹(r cos θ, r sin θ)) = c along a real chart ray, or None."""
    from .flow_engine import ale_moment

    direction = (math.cos(theta), math.sin(theta))

    def f(r):
        p = aq.chart_inverse(params, k0, (r * direction[0], r * direction[1]))
        return ale_moment(params, action, p) - c

    f0, f1 = f(0.0), f(r_max)
    if f0 == 0.0:
        return 0.0
    if np.sign(f0) == np.sign(f1):
        return None
    return brentq(f, 0.0, r_max, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300)


def chart_orbit_patch(params, action, k0, c, theta_box, r_max, weights):
    """Patch (θ, s) ↦ (r(θ)cos θ e^{iλ₁s}, r(θ)sin θ e^{iλ₂s}) of Im F in the chart around P_{k0}."""
    lam1, lam2 = weights

    def F(u):
        theta, s = float(u[0]), float(u[1])
        r = chart_level_radius(params, action, k0, c, theta, r_max)
        if r is None:
            raise OutsideChart(f"level {c} does not meet the ray θ={theta} within radius {r_max}")
        return np.array([r * math.cos(theta) * np.exp(1j * lam1 * s),
                         r * math.sin(theta) * np.exp(1j * lam2 * s)])

    return ImmersedPatch(parametrization=F, dim=2, box=(theta_box, (0.0, 2 * math.pi)),
                         params=params, k0=k0, step=1e-3)


# ---------------------------------------------------------------------------
# Lagrangian angle
# ---------------------------------------------------------------------------

def wrap_angle(theta):
    """Representative in (−π, π]."""
    t = math.remainder(float(theta), 2 * math.pi)
    return math.pi if t == -math.pi else t


def angle_distance(a, b):
    return abs(wrap_angle(a - b))


def lagrangian_angle_flat(patch, u):
    """arg Ω(∂_1F, …, ∂_mF) in (−π, π] for a flat Lagrangian patch.

    Raises:
        DegenerateFrame: If the tangent frame is rank deficient
    """
    u = np.asarray(u, dtype=float)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))
    eye = np.eye(patch.dim)
    cols = [fd_directional_derivative(patch.parametrization, u, eye[i], h) for i in range(patch.dim)]
    _frame([as_real(c) for c in cols])
    det = np.linalg.det(np.column_stack(cols))
    if abs(det) == 0:
        raise DegenerateFrame("holomorphic volume vanishes on the frame")
    return wrap_angle(np.angle(det))


def angle_formula_sign(measured, a_H, xi, theta0=0.0, tol=1e-6):
    """Match θ = ⟨a_H, ξ⟩ + θ₀ − π/2 up to the frame sign.

    Returns:
        int or None: +1 if it matches as is, −1 if it matches after
        flipping the frame orientation (shift by π), None otherwise
    """
    expected = a_H * xi + theta0 - math.pi / 2
    if angle_distance(measured, expected) <= tol:
        return 1
    if angle_distance(measured + math.pi, expected) <= tol:
        return -1
    return None


def angle_gradient(patch, u, h=1e-5):
    """Finite-difference gradient of the Lagrangian angle in patch parameters."""
    u = np.asarray(u, dtype=float)
    base = lagrangian_angle_flat(patch, u)
    grad = []
    for i in range(patch.dim):
        e = np.zeros(patch.dim)
        e[i] = 1.0
        vals = [base + wrap_angle(lagrangian_angle_flat(patch, u + k * h * e) - base)
                for k in (-2, -1, 1, 2)]
        grad.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12.0 * h))
    return np.array(grad)


def induced_metric(patch, u):
    """g_ij = ⟨∂_iF, ∂_jF⟩ of a flat patch."""
    u = np.asarray(u, dtype=float)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))
    eye = np.eye(patch.dim)
    T = np.column_stack([as_real(fd_directional_derivative(patch.parametrization, u, eye[i], h))
                         for i in range(patch.dim)])
    return T.T @ T


def omega_normalization(patch, u):
    """| |Ω(orthonormal tangent frame)| − 1 |; vanishes on Lagrangian patches."""
    u = np.asarray(u, dtype=float)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))
    eye = np.eye(patch.dim)
    cols = [as_real(fd_directional_derivative(patch.parametrization, u, eye[i], h))
            for i in range(patch.dim)]
    Q, _ = np.linalg.qr(np.column_stack(cols))
    det = np.linalg.det(np.column_stack([as_complex(q) for q in Q.T]))
    return abs(abs(det) - 1.0)


# ---------------------------------------------------------------------------
# Soliton identities
# ---------------------------------------------------------------------------

def flat_orbit_patch(model, c, box=None, span=1.5):
    """Patch (level parameter, s) ↦ h(s)·x on Im φ_c for a flat model with d = 2 or a translator with d = 1."""
    from .flat_models import TranslatorModel, level_parametrization

    curve, _ = level_parametrization(model, c)
    lam = np.asarray(model.weights, dtype=float)
    if isinstance(model, TranslatorModel):
        full = np.append(lam, 0.0)

        def F(u):
            x = curve(u[:-1])
            return x * np.exp(1j * full * u[-1]) + np.append(np.zeros(model.d), 1j * u[-1])

        level_box = tuple((-span, span) for _ in range(model.d))
        fiber_box = ((-span, span),)
        return ImmersedPatch(parametrization=F, dim=model.d + 1, box=box or level_box + fiber_box)

    def F(u):
        return curve(u[:1]) * np.exp(1j * lam * u[1])

    if np.all(lam > 0) or np.all(lam < 0):
        level_range = (0.1, 2 * math.pi - 0.1)
    else:
        # hyperbolic parameter
        level_range = (-span, span)
    return ImmersedPatch(parametrization=F, dim=2, box=box or (level_range, (0.0, 2 * math.pi)))


def _position_normal(patch, u, pos):
    u = np.asarray(u, dtype=float)
    eye = np.eye(patch.dim)
    h = patch.step * (1.0 + float(np.linalg.norm(u)))
    T = _frame([as_real(fd_directional_derivative(patch.parametrization, u, eye[i], h))
                for i in range(patch.dim)])
    return as_complex(_normal_part(T, np.eye(T.shape[0]), as_real(pos)))


def soliton_residual(patch, kind, value, points: Sequence, richardson=True):
    """Max residual of H against α·pos^⊥ (shrinker) or u^⊥ (translator) over points.

    Args:
        patch: Flat ImmersedPatch
        kind: "shrinker" or "translator"
        value: α_c for shrinkers, the velocity u for translators
        points: Parameter points to test

    Returns:
        tuple: (max relative residual, max absolute residual, list of CurvatureReport)
    """
    reports = []
    for u in points:
        H = mean_curvature_flat(patch, u, richardson=richardson)
        if kind == "shrinker":
            target = value * _position_normal(patch, u, patch.parametrization(np.asarray(u, float)))
        elif kind == "translator":
            target = _position_normal(patch, u, np.asarray(value, dtype=complex))
        else:
            raise ValueError(f"unknown soliton kind {kind!r}")
        reports.append(CurvatureReport.compare(u, H, target))
    rel = max(r.relative_error for r in reports)
    absolute = max(float(np.linalg.norm(r.mean_curvature_vec - r.comparison_vec)) for r in reports)
    logger.debug(f"{kind} soliton residual over {len(reports)} points: rel={rel:.3e} abs={absolute:.3e}")
    return rel, absolute, reports


def chi_pushforward_report(patch, u, model, point_of, act_vector):
    """Compare H at F(p, h) with the pushforward h_*χ_p (flat tier).

    Args:
        patch: Flat orbit patch
        u: Parameter point (level parameter, s)
        model: AmbientModel providing χ
        point_of: Maps the level parameter to p ∈ V_c
        act_vector: (vector, s) ↦ h(s)_* vector
    """
    from .flow_engine import chi_general

    H = mean_curvature_flat(patch, u, richardson=True)
    p = point_of(np.asarray(u[:-1], dtype=float))
    chi = chi_general(model, p)
    return CurvatureReport.compare(u, H, act_vector(chi, float(u[-1])))
