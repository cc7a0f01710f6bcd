"""The A_n ALE space M(α,0) as a computable geometry.

M(α,0) is the hyperKähler quotient of ℍ^{n+1} by the torus
K = {ζ ∈ T^{n+1} : Π ζ_i = 1}. K acts by z_i ↦ z_i ζ_i and w_i ↦ w_i ζ_i⁻¹.
Points are carried by representatives (z, w) ∈ μ_K⁻¹(α,0). Tangent vectors
are lifts, and the quotient metric is the flat metric on horizontal parts.

The residual torus G = T^{n+1}/K ≅ T² has moment map μ_G = (x, y). Its
image is the polygon Δ with edges l_0..l_{n+1} and vertices v_0..v_n. The
anti-holomorphic involution σ (complex conjugation) fixes the real slice
M^σ, which is four copies of Δ glued along edges.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize

from .errors import (
    BoundaryAmbiguity,
    CorruptPoint,
    DegenerateFrame,
    DimensionError,
    EmptyLevel,
    NumericalDomain,
    OutsideChart,
    OutsideDomain,
    OutsidePolygon,
    ProjectionFailure,
)
from .geometry_core import (
    ComplexVector,
    QuaternionicPoint,
    as_complex,
    as_real,
    gram_orthonormalize,
    real_inner,
)
from .utils import setup_logging

logger = setup_logging()

# A point is on a stratum within ON_TOL of it; closer than AMBIGUITY_TOL but not on it is ambiguous
ON_TOL = 1e-9
AMBIGUITY_TOL = 1e-6

MOMENT_TOL = 1e-10
TANGENCY_TOL = 1e-8
CHART_TOL = 1e-12

# Sheet label -> (γ0, γ1) ∈ G_ℝ applied to the non-negative representative
SHEET_SIGNS = {
    "++": (1, 1),
    "-+": (-1, 1),
    "+-": (1, -1),
    "--": (-1, -1),
}
SHEETS = tuple(SHEET_SIGNS)


def sheet_label(signs):
    """Inverse of SHEET_SIGNS."""
    for label, s in SHEET_SIGNS.items():
        if s == tuple(signs):
            return label
    raise ValueError(f"not an element of G_R: {signs!r}")


def sheet_times(label, signs):
    """Sheet reached from ``label`` by multiplying with a G_ℝ element."""
    s = SHEET_SIGNS[label]
    return sheet_label((s[0] * signs[0], s[1] * signs[1]))


@dataclass(frozen=True)
class AleParams:
    """Level α ∈ ℝ^n_{>0} and offset h₀; h_i = h_{i−1} + α_i."""

    n: int
    alpha: Tuple[float, ...]
    h0: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != self.n:
            raise ValueError(f"alpha needs {self.n} entries, got {len(alpha)}")
        for i, a in enumerate(alpha):
            if not math.isfinite(a) or a <= 0:
                raise ValueError(f"alpha[{i}] must be a positive real, got {a!r}")
        if not math.isfinite(self.h0):
            raise ValueError("h0 must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "h0", float(self.h0))

    @classmethod
    def from_h(cls, h):
        """Build from the strictly increasing sequence h₀..h_n."""
        h = [float(v) for v in h]
        return cls(n=len(h) - 1, alpha=tuple(b - a for a, b in zip(h, h[1:])), h0=h[0])

    @property
    def h(self):
        return tuple(self.h0 + s for s in itertools.accumulate((0.0,) + self.alpha))

    @property
    def h_array(self):
        return np.asarray(self.h)


@dataclass(frozen=True)
class QuotientPoint:
    """Representative of [z, w]_K together with its gauge tag."""

    rep: QuaternionicPoint
    gauge: str = "generic"

    def __post_init__(self):
        if self.gauge not in ("generic", "real_slice"):
            raise ValueError(f"unknown gauge tag {self.gauge!r}")
        if self.gauge == "real_slice" and np.max(np.abs(self.rep.as_array().imag)) > 0:
            raise CorruptPoint("real_slice representative has complex entries")

    @classmethod
    def from_arrays(cls, z, w, gauge="generic"):
        return cls(QuaternionicPoint(ComplexVector(z), ComplexVector(w)), gauge)

    @property
    def z(self):
        return self.rep.z.entries

    @property
    def w(self):
        return self.rep.w.entries

    @property
    def n(self):
        return len(self.rep) - 1

    def as_array(self):
        return self.rep.as_array()


def _split(p):
    """Return (z, w) arrays from a QuotientPoint, QuaternionicPoint or concatenated array."""
    if isinstance(p, QuotientPoint):
        return p.z, p.w
    if isinstance(p, QuaternionicPoint):
        return p.z.entries, p.w.entries
    arr = np.asarray(p, dtype=complex)
    half = arr.size // 2
    return arr[:half], arr[half:]


def _check_params(params, z):
    if len(z) != params.n + 1:
        raise DimensionError(f"representative has length {len(z)}, expected {params.n + 1}")


# ---------------------------------------------------------------------------
# Flat hyperKähler structure on ℍ^{n+1}
# ---------------------------------------------------------------------------

def complex_structure_I1(v):
    """I₁(z, w) = (iz, iw)."""
    return 1j * np.asarray(v, dtype=complex)


def complex_structure_I2(v):
    """I₂(z, w) = (−w̄, z̄)."""
    z, w = _split(v)
    return np.concatenate([-np.conj(w), np.conj(z)])


def complex_structure_I3(v):
    """I₃(z, w) = (−i w̄, i z̄)."""
    z, w = _split(v)
    return np.concatenate([-1j * np.conj(w), 1j * np.conj(z)])


def omega_c(u, v):
    """Holomorphic symplectic form ω_ℂ((z,w),(z',w')) = zᵗw' − z'ᵗw."""
    zu, wu = _split(u)
    zv, wv = _split(v)
    return complex(np.sum(zu * wv) - np.sum(zv * wu))


def omega_1(u, v):
    """Kähler form ω₁(u, v) = g(I₁u, v)."""
    return real_inner(complex_structure_I1(u), v)


# ---------------------------------------------------------------------------
# Moment map of K
# ---------------------------------------------------------------------------

def _mu_components(z, w):
    a = 0.5 * (np.abs(z) ** 2 - np.abs(w) ** 2)
    c = -1j * z * w
    return a[1:] - a[:-1], c[1:] - c[:-1]


def mu_K(params, p):
    """HyperKähler moment map of K in the f^i basis.

    Args:
        params: AleParams
        p: QuaternionicPoint, QuotientPoint or concatenated array

    Returns:
        tuple: (μ¹ as n reals, μ² + iμ³ as n complex numbers)
    """
    z, w = _split(p)
    _check_params(params, z)
    return _mu_components(z, w)


def mu_K_differential(z, w, dz, dw):
    """Differential of μ_K at (z, w) along (dz, dw)."""
    da = np.real(np.conj(z) * dz) - np.real(np.conj(w) * dw)
    dc = -1j * (dz * w + z * dw)
    return da[1:] - da[:-1], dc[1:] - dc[:-1]


def constraint_jacobian(p):
    """Real 3n × 4(n+1) Jacobian of μ_K.

    Columns follow ``as_real`` of the concatenated (z, w) vector. Rows are
    (μ¹, Re μ_ℂ, Im μ_ℂ).
    """
    z, w = _split(p)
    size = z.size
    cols = []
    for k in range(4 * size):
        r = np.zeros(4 * size)
        r[k] = 1.0
        v = as_complex(r)
        da, dc = mu_K_differential(z, w, v[:size], v[size:])
        cols.append(np.concatenate([da, dc.real, dc.imag]))
    return np.column_stack(cols)


def k_orbit_tangents(p):
    """Generators of the K-orbit at p, one per basis vector f_k = e_k − e_{k−1}."""
    z, w = _split(p)
    size = z.size
    gens = []
    for k in range(1, size):
        dz = np.zeros(size, dtype=complex)
        dw = np.zeros(size, dtype=complex)
        dz[k], dz[k - 1] = 1j * z[k], -1j * z[k - 1]
        dw[k], dw[k - 1] = -1j * w[k], 1j * w[k - 1]
        gens.append(np.concatenate([dz, dw]))
    return gens


def _vertical_frame(p):
    try:
        return gram_orthonormalize(k_orbit_tangents(p))
    except DegenerateFrame as e:
        raise CorruptPoint("K-orbit tangent is rank deficient", **e.details)


def horizontal_project(p, v):
    """Remove the K-orbit component of a lift."""
    v = np.asarray(v, dtype=complex)
    for e in _vertical_frame(p):
        v = v - real_inner(v, e) * e
    return v


def horizontal_basis(p):
    """Real orthonormal basis (4 lifts) of the horizontal space at p."""
    J = constraint_jacobian(p)
    tangent = scipy.linalg.null_space(J, rcond=1e-10)
    vertical = np.column_stack([as_real(e) for e in _vertical_frame(p)])
    projected = tangent - vertical @ (vertical.T @ tangent)
    horizontal = scipy.linalg.orth(projected, rcond=1e-8)
    if horizontal.shape[1] != 4:
        raise CorruptPoint("horizontal space does not have dimension 4", dim=int(horizontal.shape[1]))
    return [as_complex(col) for col in horizontal.T]


def is_tangent(p, v, tol=TANGENCY_TOL):
    """Whether a lift is tangent to the level set of μ_K at p."""
    z, w = _split(p)
    v = np.asarray(v, dtype=complex)
    da, dc = mu_K_differential(z, w, v[:z.size], v[z.size:])
    residual = max(np.max(np.abs(da), initial=0.0), np.max(np.abs(dc), initial=0.0))
    return residual <= tol * (1.0 + float(np.linalg.norm(v)))


def quotient_metric_raw(p, v1, v2):
    """Flat inner product of horizontal parts; no level-set checks."""
    return real_inner(horizontal_project(p, v1), horizontal_project(p, v2))


def quotient_metric_at(params, p, v1, v2):
    """Quotient metric on two lifts at p.

    Raises:
        OutsideDomain: If a lift is not tangent to μ_K⁻¹(α,0)
        CorruptPoint: If the K-orbit tangent is degenerate
    """
    z, _ = _split(p)
    _check_params(params, z)
    for v in (v1, v2):
        if not is_tangent(p, v):
            raise OutsideDomain("lift is not tangent to the level set")
    return quotient_metric_raw(p, v1, v2)


# ---------------------------------------------------------------------------
# Regular values
# ---------------------------------------------------------------------------

def walls(n):
    """All index pairs (i, j), 0 ≤ i < j ≤ n, labelling walls W_{i,j}."""
    return [(i, j) for i in range(n + 1) for j in range(i + 1, n + 1)]


def is_regular_value(params_or_n, target, tol=1e-12):
    """Check that a level of μ_K avoids every wall W_{i,j} ⊗ Im ℍ.

    Args:
        params_or_n: AleParams or n
        target: (μ¹ values, μ_ℂ values), n entries each
        tol: Absolute tolerance on wall pairings

    Returns:
        tuple: (regular, violated wall pairs)
    """
    n = params_or_n.n if isinstance(params_or_n, AleParams) else int(params_or_n)
    real_part = np.asarray(target[0], dtype=float)
    cplx_part = np.asarray(target[1], dtype=complex)
    if real_part.size != n or cplx_part.size != n:
        raise DimensionError(f"target needs {n} components")
    violated = []
    for i, j in walls(n):
        s1 = real_part[i:j].sum()
        sc = cplx_part[i:j].sum()
        if abs(s1) <= tol and abs(sc) <= tol:
            violated.append((i, j))
    return (not violated), violated


def jacobian_sigma_min(p):
    """Smallest singular value of the μ_K constraint Jacobian."""
    return float(np.linalg.svd(constraint_jacobian(p), compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# Moment polygon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonEdge:
    """Edge l_k on x = Σ_{i≥k}(y + h_i) for y_lo ≤ y ≤ y_hi; slope dy/dx = 1/(n+1−k)."""

    k: int
    slope: Tuple[int, int]
    y_lo: float
    y_hi: float


@dataclass(frozen=True)
class MomentPolygon:
    """Image Δ of μ_G with its edges and vertices."""

    params: AleParams
    vertices: Tuple[Tuple[float, float], ...]
    edges: Tuple[PolygonEdge, ...]

    def boundary_x(self, y):
        """Left boundary F(y) = Σ max(y + h_i, 0)."""
        return float(np.sum(np.maximum(y + self.params.h_array, 0.0)))

    def gap(self, x, y):
        """Horizontal distance x − F(y); negative outside Δ."""
        return float(x) - self.boundary_x(y)

    def contains(self, x, y, tol=1e-12):
        return self.gap(x, y) >= -tol * (1.0 + abs(x))

    def edge_index(self, y):
        """Index k of the edge l_k spanning height y."""
        h = self.params.h
        for k in range(self.params.n + 1):
            if y >= -h[k]:
                return k
        return self.params.n + 1

    def edge_x(self, k, y):
        return float(sum(y + hi for hi in self.params.h[k:]))

    def as_dict(self):
        """JSON form: vertices in index order, slopes as [num, den]."""
        return {
            "n": self.params.n,
            "h": list(self.params.h),
            "vertices": [list(v) for v in self.vertices],
            "edges": [{"k": e.k, "slope": list(e.slope)} for e in self.edges],
        }


def polygon(params):
    """Build Δ = Im μ_G.

    Returns:
        MomentPolygon: Vertices v_k = (Σ_{i>k}(h_i − h_k), −h_k) and edges l_0..l_{n+1}
    """
    h = params.h
    n = params.n
    vertices = tuple(
        (float(sum(h[i] - h[k] for i in range(k + 1, n + 1))), 0.0 - h[k]) for k in range(n + 1)
    )
    edges = []
    for k in range(n + 2):
        y_hi = math.inf if k == 0 else -h[k - 1]
        y_lo = -math.inf if k == n + 1 else -h[k]
        edges.append(PolygonEdge(k=k, slope=(1, n + 1 - k), y_lo=y_lo, y_hi=y_hi))
    return MomentPolygon(params=params, vertices=vertices, edges=tuple(edges))


def f_y(params, y, d):
    """f_y(d) = ½ Σ [√((y+h_i)² + d²) + (y+h_i)]."""
    c = y + params.h_array
    return 0.5 * float(np.sum(np.hypot(c, d) + c))


def _f_y_prime(params, y, d):
    c = y + params.h_array
    r = np.hypot(c, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(r > 0, d / r, 1.0)
    return 0.5 * float(np.sum(terms))


def _solve_d(params, x, y):
    """Solve f_y(d) = x for d ≥ 0."""
    left = f_y(params, y, 0.0)
    excess = x - left
    if excess <= 1e-15 * (1.0 + abs(x)):
        return 0.0

    g = lambda d: f_y(params, y, d) - x
    hi = max(1.0, excess)
    for _ in range(200):
        if g(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise NumericalDomain("could not bracket f_y root", x=x, y=y)
    try:
        d = brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as e:
        raise NumericalDomain(f"f_y inversion failed: {e}", x=x, y=y)

    # Newton polish
    for _ in range(2):
        slope = _f_y_prime(params, y, d)
        if slope <= 0:
            break
        step = g(d) / slope
        if not (0.0 <= d - step <= hi):
            break
        d -= step
    if abs(g(d)) > 1e-13 * (1.0 + abs(x)):
        raise NumericalDomain("f_y inversion did not reach tolerance", residual=abs(g(d)))
    return d


def _moduli(params, y, d):
    """|z_i|², |w_i|² from the level (y, d), avoiding cancellation."""
    c = y + params.h_array
    r = np.hypot(c, d)
    d2 = d * d
    with np.errstate(divide="ignore", invalid="ignore"):
        z2 = np.where(c >= 0, r + c, np.where(r - c > 0, d2 / (r - c), 0.0))
        w2 = np.where(c <= 0, r - c, np.where(r + c > 0, d2 / (r + c), 0.0))
    return z2, w2


def act_G_arrays(z, w, gamma0, gamma1):
    """Torus action of G: z₀ ↦ z₀γ₀γ₁, z_i ↦ z_iγ₀ (i≥1), w₀ ↦ w₀γ₁⁻¹."""
    z = np.array(z, dtype=complex)
    w = np.array(w, dtype=complex)
    z[0] *= gamma0 * gamma1
    z[1:] *= gamma0
    w[0] /= gamma1
    return z, w


def act_G(p, gamma0, gamma1):
    """Apply (γ₀, γ₁) ∈ G to a quotient point."""
    z, w = act_G_arrays(p.z, p.w, gamma0, gamma1)
    real = (p.gauge == "real_slice" and np.isreal(gamma0) and np.isreal(gamma1))
    return QuotientPoint.from_arrays(z, w, "real_slice" if real else "generic")


def solve_level(params, x, y, branch="++"):
    """Real-slice representative of μ_G⁻¹(x, y) on a G_ℝ sheet.

    Args:
        params: AleParams
        x, y: Moment coordinates in Δ
        branch: Sheet label from SHEETS

    Returns:
        QuotientPoint: real_slice representative

    Raises:
        OutsidePolygon: If (x, y) ∉ Δ
        NumericalDomain: If the f_y inversion fails
    """
    if branch not in SHEET_SIGNS:
        raise ValueError(f"unknown sheet {branch!r}")
    delta = polygon(params)
    if not delta.contains(x, y):
        raise OutsidePolygon(f"({x}, {y}) lies outside the moment polygon", x=x, y=y,
                             gap=delta.gap(x, y))
    d = _solve_d(params, x, y)
    z2, w2 = _moduli(params, y, d)
    z = np.sqrt(z2)
    w = np.sqrt(w2)
    z, w = act_G_arrays(z, w, *SHEET_SIGNS[branch])
    return QuotientPoint.from_arrays(z.real, w.real, "real_slice")


def mu_G_raw(params, p):
    """(x, y) using the k=0 formula for y; valid off the level set too."""
    z, w = _split(p)
    x = 0.5 * float(np.sum(np.abs(z) ** 2))
    y = 0.5 * float(abs(z[0]) ** 2 - abs(w[0]) ** 2) - params.h0
    return x, y


def mu_G(params, p):
    """Moment map of G: x = ½Σ|z_i|², y = ½(|z_k|²−|w_k|²) − h_k averaged over k.

    Raises:
        CorruptPoint: If the per-k values of y disagree
    """
    z, w = _split(p)
    _check_params(params, z)
    x = 0.5 * float(np.sum(np.abs(z) ** 2))
    ys = 0.5 * (np.abs(z) ** 2 - np.abs(w) ** 2) - params.h_array
    scale = 1.0 + float(np.max(np.abs(z) ** 2 + np.abs(w) ** 2))
    spread = float(np.max(ys) - np.min(ys))
    if spread > MOMENT_TOL * scale:
        raise CorruptPoint("representative is off the level set", spread=spread)
    return x, float(np.mean(ys))


def level_residual(params, p):
    """Max deviation of p from μ_K⁻¹(α, 0)."""
    z, w = _split(p)
    _check_params(params, z)
    mu1, muc = _mu_components(z, w)
    return max(float(np.max(np.abs(mu1 - np.asarray(params.alpha)))), float(np.max(np.abs(muc))))


# ---------------------------------------------------------------------------
# Isotropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsotropyStratum:
    """Isotropy type: trivial, circle H_{1,−m} on int(l_k), or all of G at v_k."""

    kind: str
    k: int = -1
    generator: Tuple[int, int] = (0, 0)

    @property
    def label(self):
        if self.kind == "trivial":
            return "trivial"
        if self.kind == "torus":
            return "G"
        return f"H_{{{self.generator[0]},{self.generator[1]}}}"


def _zero_pattern_ok(z, w, stratum, n, scale):
    tol = AMBIGUITY_TOL * scale
    z2, w2 = np.abs(z) ** 2, np.abs(w) ** 2
    if stratum.kind == "trivial":
        return bool(np.all(z2 > 0) and np.all(w2 > 0))
    k = stratum.k
    if stratum.kind == "circle":
        return bool(np.all(z2[:k] <= tol) and np.all(w2[k:] <= tol))
    return bool(np.all(z2[:k + 1] <= tol) and np.all(w2[k:] <= tol))


def isotropy(params, p):
    """Classify the isotropy subgroup of G at p from μ_G(p).

    Raises:
        BoundaryAmbiguity: Within AMBIGUITY_TOL of a stratum but not on it
        CorruptPoint: If the zero pattern of (z, w) disagrees with the stratum
    """
    x, y = mu_G(params, p)
    delta = polygon(params)
    n = params.n
    scale = 1.0 + abs(x) + abs(y)

    dists = [math.hypot(x - vx, y - vy) for vx, vy in delta.vertices]
    k_near = int(np.argmin(dists))
    gap = delta.gap(x, y)
    if dists[k_near] <= ON_TOL * scale:
        stratum = IsotropyStratum("torus", k=k_near, generator=(1, 0))
    elif dists[k_near] < AMBIGUITY_TOL * scale:
        raise BoundaryAmbiguity("point is near a fixed point of G", distance=dists[k_near])
    elif gap <= ON_TOL * scale:
        k = delta.edge_index(y)
        stratum = IsotropyStratum("circle", k=k, generator=(1, -(n + 1 - k)))
    elif gap < AMBIGUITY_TOL * scale:
        raise BoundaryAmbiguity("point is near an edge of the polygon", distance=gap)
    else:
        stratum = IsotropyStratum("trivial")

    if not _zero_pattern_ok(p.z, p.w, stratum, n, scale):
        raise CorruptPoint(f"zero pattern contradicts stratum {stratum.label}")
    return stratum


# ---------------------------------------------------------------------------
# Local charts around the fixed points P_k
# ---------------------------------------------------------------------------

def _chart_constants(params, k0):
    h = params.h
    return np.array([math.sqrt(2.0 * abs(h[k0] - h[i])) for i in range(params.n + 1)])


def _check_chart_index(params, k0):
    if not 0 <= k0 <= params.n:
        raise ValueError(f"chart index must be in 0..{params.n}, got {k0}")


def local_chart(params, k0, p):
    """Holomorphic coordinates (u₁, u₂) on U_{k0}; φ_{k0}(P_{k0}) = (0, 0).

    Raises:
        OutsideChart: If w_i = 0 for some i < k0 or z_j = 0 for some j > k0
    """
    _check_chart_index(params, k0)
    z, w = _split(p)
    _check_params(params, z)
    c = _chart_constants(params, k0)
    scale = 1.0 + float(np.max(np.abs(z))) + float(np.max(np.abs(w)))
    if np.any(np.abs(w[:k0]) <= CHART_TOL * scale) or np.any(np.abs(z[k0 + 1:]) <= CHART_TOL * scale):
        raise OutsideChart(f"point is outside the chart around P_{k0}")
    u1 = z[k0] * np.prod(c[:k0] / w[:k0]) * np.prod(z[k0 + 1:] / c[k0 + 1:])
    u2 = w[k0] * np.prod(w[:k0] / c[:k0]) * np.prod(c[k0 + 1:] / z[k0 + 1:])
    return complex(u1), complex(u2)


def chart_pushforward(params, k0, p, v):
    """Differential of φ_{k0} applied to a lift v at p."""
    z, w = _split(p)
    dz, dw = _split(v)
    c = _chart_constants(params, k0)
    pre1 = np.prod(c[:k0] / w[:k0]) * np.prod(z[k0 + 1:] / c[k0 + 1:])
    pre2 = np.prod(w[:k0] / c[:k0]) * np.prod(c[k0 + 1:] / z[k0 + 1:])
    log1 = -np.sum(dw[:k0] / w[:k0]) + np.sum(dz[k0 + 1:] / z[k0 + 1:])
    du1 = pre1 * dz[k0] + z[k0] * pre1 * log1
    du2 = pre2 * dw[k0] - w[k0] * pre2 * log1
    return np.array([du1, du2], dtype=complex)


def _log_q(A, B, c):
    """log of the positive root q of A q² − 2 c q − B = 0."""
    r = math.sqrt(c * c + A * B)
    if c >= 0:
        if A <= 0:
            return math.inf
        return math.log((c + r) / A)
    if B <= 0:
        return -math.inf
    return math.log(B / (r - c))


def chart_inverse(params, k0, u):
    """Point of μ_K⁻¹(α,0) with chart coordinates u.

    Builds the complexified-gauge representative with d = u₁u₂, then scales
    by positive ζ ∈ K_ℂ until the real moment equations hold.
    """
    _check_chart_index(params, k0)
    u1, u2 = complex(u[0]), complex(u[1])
    size = params.n + 1
    c = _chart_constants(params, k0)
    d = u1 * u2
    Z = np.zeros(size, dtype=complex)
    W = np.zeros(size, dtype=complex)
    Z[:k0] = d / c[:k0]
    W[:k0] = c[:k0]
    Z[k0], W[k0] = u1, u2
    Z[k0 + 1:] = c[k0 + 1:]
    W[k0 + 1:] = d / c[k0 + 1:]

    A = np.abs(Z) ** 2
    B = np.abs(W) ** 2
    h = params.h_array
    vertex = [i for i in range(size) if A[i] == 0 and B[i] == 0]
    active = [i for i in range(size) if i not in vertex]

    def g(y):
        return sum(_log_q(A[i], B[i], y + h[i]) for i in active)

    if vertex:
        y = -h[vertex[0]]
    else:
        lo_bound = max((-h[i] for i in active if B[i] == 0), default=-math.inf)
        hi_bound = min((-h[i] for i in active if A[i] == 0), default=math.inf)
        y = _bracket_and_solve(g, lo_bound, hi_bound)

    logq = np.zeros(size)
    for i in active:
        logq[i] = _log_q(A[i], B[i], y + h[i])
    if vertex:
        logq[vertex[0]] = -logq.sum()
    scale = np.exp(0.5 * logq)
    z = Z * scale
    w = W / scale
    real = abs(u1.imag) == 0 and abs(u2.imag) == 0
    if real:
        return QuotientPoint.from_arrays(z.real, w.real, "real_slice")
    return normalize_gauge(z, w)


def _bracket_and_solve(g, lo_bound, hi_bound):
    """Root of an increasing function on (lo_bound, hi_bound), either end possibly infinite."""
    if math.isfinite(lo_bound) and math.isfinite(hi_bound):
        mid = 0.5 * (lo_bound + hi_bound)
        half = 0.5 * (hi_bound - lo_bound)
    elif math.isfinite(lo_bound):
        mid, half = lo_bound + 1.0, 1.0
    elif math.isfinite(hi_bound):
        mid, half = hi_bound - 1.0, 1.0
    else:
        mid, half = 0.0, 1.0

    lo = mid
    step = half
    for _ in range(1100):
        if g(lo) < 0:
            break
        if math.isfinite(lo_bound):
            step *= 0.5
            lo = lo_bound + step
        else:
            lo -= step
            step *= 2.0
    else:
        raise NumericalDomain("could not bracket the gauge equation from below")

    hi = mid
    step = half
    for _ in range(1100):
        if g(hi) > 0:
            break
        if math.isfinite(hi_bound):
            step *= 0.5
            hi = hi_bound - step
        else:
            hi += step
            step *= 2.0
    else:
        raise NumericalDomain("could not bracket the gauge equation from above")

    try:
        return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as e:
        raise NumericalDomain(f"gauge normalisation failed: {e}")


def normalize_gauge(z, w):
    """Canonical generic representative: phases of K make z (or w where z vanishes) share one phase."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    theta = np.where(np.abs(z) >= np.abs(w), -np.angle(z), np.angle(w))
    theta = theta - theta.mean()
    zeta = np.exp(1j * theta)
    return QuotientPoint.from_arrays(z * zeta, w / zeta, "generic")


def chart_metric(params, k0, u):
    """4×4 metric of M(α,0) in the real chart coordinates (Re u₁, Re u₂, Im u₁, Im u₂)."""
    p = chart_inverse(params, k0, u)
    D = np.column_stack([as_real(chart_pushforward(params, k0, p, e)) for e in horizontal_basis(p)])
    inverse = D @ D.T
    return np.linalg.inv(inverse)


def chart_distortion(params, k0, radius, count=16, seed=0):
    """Max spectral deviation of the chart metric from the identity on |u| = radius."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        r = rng.standard_normal(4)
        r *= radius / np.linalg.norm(r)
        g = chart_metric(params, k0, as_complex(r))
        worst = max(worst, float(np.linalg.norm(g - np.eye(4), 2)))
    logger.debug(f"Chart distortion at radius {radius} around P_{k0}: {worst}")
    return worst


# ---------------------------------------------------------------------------
# Orbifold limit α = 0
# ---------------------------------------------------------------------------

def orbifold_lift(n, u, v):
    """φ̃(u, v) = (u, …, u; v, …, v)/√(n+1) as a concatenated array."""
    s = 1.0 / math.sqrt(n + 1)
    return np.concatenate([np.full(n + 1, u * s, dtype=complex), np.full(n + 1, v * s, dtype=complex)])


def orbifold_lift_vector(n, du, dv):
    """Differential of φ̃ (it is linear)."""
    return orbifold_lift(n, du, dv)


# ---------------------------------------------------------------------------
# Involution and G-orbits
# ---------------------------------------------------------------------------

def involution_sigma(p):
    """σ([z, w]_K) = [z̄, w̄]_K."""
    z, w = np.conj(p.z), np.conj(p.w)
    if p.gauge == "real_slice":
        return QuotientPoint.from_arrays(z.real, w.real, "real_slice")
    return QuotientPoint.from_arrays(z, w, "generic")


def k_gauge_residual(p, q):
    """Distance between representatives modulo K."""
    zp, wp = _split(p)
    zq, wq = _split(q)
    zeta = np.ones(zp.size, dtype=complex)
    for i in range(zp.size):
        if abs(zp[i]) >= abs(wp[i]) and abs(zp[i]) > 0:
            zeta[i] = zq[i] / zp[i]
        elif abs(wp[i]) > 0:
            zeta[i] = wp[i] / wq[i] if abs(wq[i]) > 0 else np.inf
    if not np.all(np.isfinite(zeta)):
        return math.inf
    zeta = zeta / np.abs(zeta)
    # absorb the product defect evenly; a nonzero defect remains in the residual
    residual = max(float(np.max(np.abs(zq - zp * zeta))), float(np.max(np.abs(wq - wp / zeta))))
    return max(residual, abs(np.prod(zeta) - 1.0))


def find_g_element(p, q):
    """Search (γ₀, γ₁) ∈ G with p·(γ₀, γ₁) = q modulo K.

    Returns:
        tuple: (γ₀, γ₁, residual)
    """
    def residual(theta):
        z, w = act_G_arrays(p.z, p.w, np.exp(1j * theta[0]), np.exp(1j * theta[1]))
        return k_gauge_residual(np.concatenate([z, w]), q)

    inv_q = _invariant_vector(q.z, q.w)

    def mismatch(theta):
        # K-invariants remove the gauge freedom, leaving a smooth objective on G
        z, w = act_G_arrays(p.z, p.w, np.exp(1j * theta[0]), np.exp(1j * theta[1]))
        return float(np.sum(np.abs(_invariant_vector(z, w) - inv_q) ** 2))

    candidates = [(t0, t1) for t0 in np.linspace(0, 2 * np.pi, 24, endpoint=False)
                  for t1 in np.linspace(0, 2 * np.pi, 24, endpoint=False)]
    start = min(candidates, key=mismatch)
    result = minimize(mismatch, np.asarray(start), method="Nelder-Mead",
                      options={"xatol": 1e-13, "fatol": 1e-30, "maxiter": 4000})
    theta = result.x
    res = residual(theta)
    return complex(np.exp(1j * theta[0])), complex(np.exp(1j * theta[1])), res


def _invariant_vector(z, w):
    return np.array([z[0] * w[0], np.prod(z), np.prod(w)], dtype=complex)


def quotient_invariants(params, p):
    """K-invariant real coordinates (x, y, z₀w₀, Πz_i, Πw_i) separating generic points."""
    z, w = _split(p)
    x, y = mu_G_raw(params, p)
    inv = _invariant_vector(z, w)
    return np.concatenate([[x, y], inv.real, inv.imag])


# ---------------------------------------------------------------------------
# Real subtorus elements and the fixed surface
# ---------------------------------------------------------------------------

def real_subtorus_elements(a, b):
    """G_ℝ ∩ H_{a,b} = {(1,1), ((−1)^a, (−1)^b)} for coprime (a, b)."""
    nontrivial = ((-1) ** (a % 2), (-1) ** (b % 2))
    if nontrivial == (1, 1):
        return [(1, 1)]
    return [(1, 1), nontrivial]


def edge_stabilizer(n, k):
    """G_ℝ elements fixing the interior of l_k (inside H_{1,−(n+1−k)})."""
    return real_subtorus_elements(1, -(n + 1 - k))


@dataclass
class FixedSurfaceAtlas:
    """Four copies of Δ and the sheet pairs glued along each edge."""

    n: int
    sheets: Tuple[str, ...] = SHEETS
    gluing: Dict[int, List[Tuple[str, str]]] = field(default_factory=dict)

    def as_dict(self):
        return {"n": self.n, "sheets": list(self.sheets),
                "gluing": {str(k): [list(p) for p in pairs] for k, pairs in self.gluing.items()}}


@dataclass(frozen=True)
class TopologyReport:
    genus: int
    holes: int
    euler: int
    atlas: FixedSurfaceAtlas


def _pairs_for(n, k):
    g = [s for s in edge_stabilizer(n, k) if s != (1, 1)][0]
    seen = set()
    pairs = []
    for label in SHEETS:
        if label in seen:
            continue
        other = sheet_times(label, g)
        seen.update({label, other})
        pairs.append((label, other))
    return pairs


def fixed_surface_atlas(n):
    """Gluing data of M^σ: along l_k, sheet s meets s·g_k with g_k the nontrivial stabilizer."""
    return FixedSurfaceAtlas(n=n, gluing={k: _pairs_for(n, k) for k in range(n + 2)})


def fixed_surface_topology(params_or_n):
    """Genus and number of boundary circles of M^σ truncated far out.

    Cells of the truncated Δ (vertices v_k, the two arc endpoints, edges,
    the outer arc and the face) are counted with multiplicity
    4/|stabilizer in G_ℝ|. Boundary circles are found by following
    arc copies through the gluing at l_0 and l_{n+1}.
    """
    n = params_or_n.n if isinstance(params_or_n, AleParams) else int(params_or_n)
    atlas = fixed_surface_atlas(n)

    def copies(stab):
        return 4 // len(stab)

    full = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
    V = (n + 1) * copies(full) + copies(edge_stabilizer(n, 0)) + copies(edge_stabilizer(n, n + 1))
    E = sum(copies(edge_stabilizer(n, k)) for k in range(n + 2)) + copies([(1, 1)])
    F = copies([(1, 1)])
    euler = V - E + F

    # union-find over arc endpoints: (end, sheet) with end 0 on l_0 and end 1 on l_{n+1}
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    for end, k in ((0, 0), (1, n + 1)):
        for s1, s2 in atlas.gluing[k]:
            union((end, s1), (end, s2))
    for s in SHEETS:
        union((0, s), (1, s))
    holes = len({find((end, s)) for end in (0, 1) for s in SHEETS})

    genus = (2 - euler - holes) // 2
    logger.debug(f"Fixed surface n={n}: euler={euler}, holes={holes}, genus={genus}")
    return TopologyReport(genus=genus, holes=holes, euler=euler, atlas=atlas)


def expected_topology(n):
    """Closed-form (genus, holes) of M^σ."""
    if n % 2:
        return (n - 1) // 2, 2
    return n // 2, 1


# ---------------------------------------------------------------------------
# Level sets of μ_{H_{a,b}} inside Δ
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSegment:
    """r_c = Δ ∩ {a x + b y = c}, parametrised by s along a unit direction."""

    a: int
    b: int
    c: float
    base: Tuple[float, float]
    direction: Tuple[float, float]
    s_lo: float
    s_hi: float

    def point(self, s):
        return (self.base[0] + s * self.direction[0], self.base[1] + s * self.direction[1])

    @property
    def bounded(self):
        return math.isfinite(self.s_lo) and math.isfinite(self.s_hi)

    def endpoints(self):
        return [self.point(s) for s in (self.s_lo, self.s_hi) if math.isfinite(s)]


def level_segment(params, a, b, c):
    """Intersect the line a x + b y = c with Δ.

    Raises:
        EmptyLevel: If the line misses Δ
    """
    if a == 0 and b == 0:
        raise OutsideDomain("(a, b) must be nonzero")
    norm2 = float(a * a + b * b)
    base = (c * a / norm2, c * b / norm2)
    norm = math.sqrt(norm2)
    direction = (-b / norm, a / norm)
    delta = polygon(params)

    def g(s):
        x = base[0] + s * direction[0]
        y = base[1] + s * direction[1]
        return x - delta.boundary_x(y)

    def tail_slope(sign):
        # F'(y) is the number of h_i with y + h_i > 0 far along the line
        dy = direction[1]
        if dy == 0:
            count = sum(1 for hi in params.h if base[1] + hi > 0)
        else:
            count = params.n + 1 if sign * dy > 0 else 0
        return direction[0] - count * dy

    if direction[1] != 0:
        knots = sorted((-hi - base[1]) / direction[1] for hi in params.h)
    else:
        knots = [0.0]
    knots = [knots[0] - 1.0] + knots + [knots[-1] + 1.0]
    values = [g(s) for s in knots]

    slope_left, slope_right = tail_slope(-1), tail_slope(1)
    tol = 1e-14 * (1.0 + abs(c))

    if slope_left < 0 or (slope_left == 0 and values[0] >= -tol):
        s_lo = -math.inf
    else:
        s_lo = None
        if values[0] >= -tol:
            s_lo = knots[0] - values[0] / slope_left
        else:
            for s0, s1, g0, g1 in zip(knots, knots[1:], values, values[1:]):
                if g1 >= -tol:
                    s_lo = s0 + (s1 - s0) * (-g0) / (g1 - g0) if g1 != g0 else s1
                    break
    if slope_right > 0 or (slope_right == 0 and values[-1] >= -tol):
        s_hi = math.inf
    else:
        s_hi = None
        if values[-1] >= -tol:
            s_hi = knots[-1] - values[-1] / slope_right
        else:
            pairs = list(zip(knots, knots[1:], values, values[1:]))
            for s0, s1, g0, g1 in reversed(pairs):
                if g0 >= -tol:
                    s_hi = s0 + (s1 - s0) * g0 / (g0 - g1) if g0 != g1 else s0
                    break
    if s_lo is None or s_hi is None or s_lo > s_hi:
        raise EmptyLevel(f"level {c} of H_{{{a},{b}}} misses the moment polygon")
    return LevelSegment(a=a, b=b, c=float(c), base=base, direction=direction, s_lo=s_lo, s_hi=s_hi)


@dataclass(frozen=True)
class LevelSeed:
    """A real-slice point of V_c with its sheet and line parameter."""

    sheet: str
    s: float
    point: QuotientPoint


def segment_parameters(segment, count, span=None):
    """Interior parameters along r_c: midpoints when bounded, a window from the finite end otherwise."""
    if segment.bounded:
        width = segment.s_hi - segment.s_lo
        return [segment.s_lo + width * (k + 0.5) / count for k in range(count)]
    span = span if span is not None else max(3.0, 2.0 * abs(segment.c))
    if math.isfinite(segment.s_hi):
        return [segment.s_hi - span * (k + 0.5) / count for k in range(count)]
    if math.isfinite(segment.s_lo):
        return [segment.s_lo + span * (k + 0.5) / count for k in range(count)]
    return [span * ((k + 0.5) / count - 0.5) for k in range(count)]


def ale_level_sample(params, a, b, c, count, sheets=SHEETS, span=None):
    """Real-slice samples of V_c on the requested sheets, in sheet-major order."""
    segment = level_segment(params, a, b, c)
    seeds = []
    for sheet in sheets:
        for s in segment_parameters(segment, count, span):
            x, y = segment.point(s)
            seeds.append(LevelSeed(sheet=sheet, s=s, point=solve_level(params, x, y, sheet)))
    logger.debug(f"Sampled {len(seeds)} seeds on level {c} of H_{{{a},{b}}}")
    return seeds


# ---------------------------------------------------------------------------
# Real-slice constraint projection
# ---------------------------------------------------------------------------

def real_slice_constraints(params, x):
    """The 2n real equations of μ_K⁻¹(α,0) restricted to real (z, w)."""
    size = params.n + 1
    z, w = x[:size], x[size:]
    a = 0.5 * (z ** 2 - w ** 2)
    prod = z * w
    return np.concatenate([a[1:] - a[:-1] - np.asarray(params.alpha), prod[1:] - prod[:-1]])


def real_slice_jacobian(params, x):
    size = params.n + 1
    z, w = x[:size], x[size:]
    n = params.n
    J = np.zeros((2 * n, 2 * size))
    for i in range(1, size):
        r = i - 1
        J[r, i], J[r, size + i] = z[i], -w[i]
        J[r, i - 1], J[r, size + i - 1] = -z[i - 1], w[i - 1]
        J[n + r, i], J[n + r, size + i] = w[i], z[i]
        J[n + r, i - 1], J[n + r, size + i - 1] = -w[i - 1], -z[i - 1]
    return J


def project_real_slice(params, rep, tol=1e-12, max_iter=25):
    """Newton projection with the Jacobian pseudo-inverse back onto the real level set.

    Args:
        params: AleParams
        rep: Concatenated real (z, w), possibly complex-typed with zero imaginary part
        tol: Residual tolerance, scaled by 1 + |rep|²
        max_iter: Iteration cap

    Returns:
        tuple: (projected complex array, iterations used)

    Raises:
        ProjectionFailure: If the residual does not reach tolerance
    """
    x = np.real(np.asarray(rep, dtype=complex)).astype(float)
    scale = 1.0 + float(np.dot(x, x))
    for it in range(max_iter + 1):
        F = real_slice_constraints(params, x)
        if float(np.max(np.abs(F))) <= tol * scale:
            return x.astype(complex), it
        if it == max_iter:
            break
        x = x - np.linalg.pinv(real_slice_jacobian(params, x)) @ F
        if not np.all(np.isfinite(x)):
            break
    raise ProjectionFailure("Newton projection did not converge",
                            point=[float(v) for v in x], residual=float(np.max(np.abs(F))))


def sheet_of(p):
    """Sheet label of a real-slice representative, read off the signs of its entries.

    Entries that vanish leave the corresponding sign undetermined; "+" is used.
    """
    z = np.real(p.z)
    w = np.real(p.w)
    nonzero = [v for v in z[1:] if v != 0]
    gamma0 = 1 if not nonzero or nonzero[0] > 0 else -1
    if w[0] != 0:
        gamma1 = 1 if w[0] > 0 else -1
    elif z[0] != 0:
        gamma1 = (1 if z[0] > 0 else -1) * gamma0
    else:
        gamma1 = 1
    return sheet_label((gamma0, gamma1))
