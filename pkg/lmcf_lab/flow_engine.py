"""Lagrangian mean curvature flow of torus-invariant Lagrangians.

A level set V_c of μ_H inside a Lagrangian L evolves by the vector field
χ_p = I_p(α_p ξ^#_p), α_p = ⟨a_H, ξ⟩ / |ξ^#_p|². The flow moves V_{c₀} to
V_{c_t}, c_t = c₀ − t⟨a_H⟩, and the image of V_{c_t} × H is the evolving
Lagrangian.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from . import ale_quotient as aq
from .errors import EmptyLevel, FixedPointHit, OnFixedLevel, ProjectionFailure
from .flat_models import ShrinkerModel, TranslatorModel, shrinker_aH
from .geometry_core import AmbientModel, real_inner
from .utils import setup_logging

logger = setup_logging()

GENERATOR_TOL = 1e-12
# Neighbouring seeds drifting apart by more than this factor are flagged for reseeding
RESEED_FACTOR = 10.0
# Near the singular time the step is capped at (t_sing − t)/STEP_DIVISOR
STEP_DIVISOR = 16.0


@dataclass(frozen=True)
class SubtorusAction:
    """The circle H_{a,b} ⊂ G generated by w_{a,b} = a p₀ + b p₁."""

    a: int
    b: int
    n: int

    def __post_init__(self):
        for name in ("a", "b", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"{name} must be an integer, got {v!r}")
        if math.gcd(abs(self.a), abs(self.b)) != 1:
            raise ValueError(f"a and b must be coprime, got ({self.a}, {self.b})")
        for l in range(self.n + 2):
            if self.b == -l * self.a:
                raise ValueError(f"excluded slope b = -{l}*a")

    @property
    def static(self):
        return self.a == 0

    @property
    def a_H(self):
        return float(self.a)

    def element(self, s):
        """(γ₀, γ₁) = (e^{ias}, e^{ibs})."""
        return np.exp(1j * self.a * s), np.exp(1j * self.b * s)


@dataclass(frozen=True)
class IntegratorConfig:
    """RK4 step, Newton projection controls and the halting margin."""

    step: float = 1e-3
    projection_tol: float = 1e-12
    max_newton: int = 25
    stop_margin: float = 1e-6

    def __post_init__(self):
        for name in ("step", "projection_tol", "stop_margin"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if int(self.max_newton) != self.max_newton or self.max_newton < 1:
            raise ValueError(f"max_newton must be a positive integer, got {self.max_newton!r}")
        if self.stop_margin >= 1:
            raise ValueError(f"stop_margin must lie in (0, 1), got {self.stop_margin!r}")


@dataclass
class FlowTrajectory:
    """Integrated level sets: one row of seed states per recorded time."""

    model: AmbientModel
    c0: float
    times: Tuple[float, ...]
    samples: List[np.ndarray]
    moments: np.ndarray
    pre_moments: np.ndarray
    halt_reason: str = "horizon"
    singular_time: Optional[float] = None
    reseed_flags: Tuple[int, ...] = ()
    newton_iterations: int = 0
    tags: Tuple[str, ...] = ()
    cfg: IntegratorConfig = field(default_factory=IntegratorConfig)

    @property
    def seed_count(self):
        return self.samples[0].shape[0]

    def levels(self, a_H=None):
        a_H = self.model.a_H if a_H is None else a_H
        return np.array([self.c0 - t * a_H for t in self.times])

    def drift_against(self, a_H=None, pre=False):
        """Per-time max |μ_H(γ(t)) − (c₀ − t·a_H)|."""
        moments = self.pre_moments if pre else self.moments
        target = self.levels(a_H)
        return [float(np.max(np.abs(row - c))) for row, c in zip(moments, target)]

    @property
    def drift_residuals(self):
        return self.drift_against()

    @property
    def pre_projection_residuals(self):
        return self.drift_against(pre=True)

    def index_of(self, t):
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[i] - t) > 1e-12 * (1.0 + abs(t)):
            return None
        return i

    def state_at(self, t):
        """Seed states at time t: recorded ones, or one RK4 step from the previous record."""
        if not self.times[0] - 1e-12 <= t <= self.times[-1] + 1e-12:
            raise ValueError(f"time {t} is outside the trajectory range "
                             f"[{self.times[0]}, {self.times[-1]}]")
        i = self.index_of(t)
        if i is not None:
            return self.samples[i]
        k = int(np.searchsorted(self.times, t)) - 1
        h = t - self.times[k]
        rows = []
        for p in self.samples[k]:
            q = rk4_step(self.model, p, h)
            if self.model.project is not None:
                q, _ = self.model.project(q, self.cfg.projection_tol, self.cfg.max_newton)
            rows.append(q)
        return np.array(rows)


# ---------------------------------------------------------------------------
# χ and its ingredients
# ---------------------------------------------------------------------------

def chi_general(model, p):
    """χ_p = I_p(α_p ξ^#_p) with α_p = a_H / g(ξ^#, ξ^#).

    Raises:
        FixedPointHit: If the generator vanishes at p
    """
    p = np.asarray(p, dtype=complex)
    if model.a_H == 0:
        return np.zeros_like(p)
    gen = model.action_generator_at(p, 1.0)
    norm2 = model.metric_at(p, gen, gen)
    if math.sqrt(max(norm2, 0.0)) <= GENERATOR_TOL:
        raise FixedPointHit("action generator vanishes", point=[complex(v).real for v in p],
                            generator_norm=math.sqrt(max(norm2, 0.0)))
    return model.cplx_I1_at(p, (model.a_H / norm2) * gen)


def ale_generator_lift(action, p):
    """Lift (i(a+b)z₀, i a z₁, …, i a z_n; −i b w₀, 0, …, 0) of w_{a,b}."""
    z, w = aq._split(p)
    dz = 1j * action.a * np.asarray(z, dtype=complex)
    dz[0] = 1j * (action.a + action.b) * z[0]
    dw = np.zeros(len(w), dtype=complex)
    dw[0] = -1j * action.b * w[0]
    return np.concatenate([dz, dw])


def ale_moment(params, action, p):
    """μ_{H_{a,b}} = a x + b y."""
    x, y = aq.mu_G_raw(params, p)
    return action.a * x + action.b * y


def ale_ambient(params, action):
    """Package M(α,0) with the H_{a,b} action as an AmbientModel.

    Points are concatenated (z, w) representatives and vectors are lifts.
    The metric, I₁ and Ω act on horizontal parts.
    """
    if action.n != params.n:
        raise ValueError(f"action is for n={action.n}, params for n={params.n}")

    def generator(p, xi):
        return xi * aq.horizontal_project(p, ale_generator_lift(action, p))

    def act(p, s):
        z, w = aq.act_G_arrays(*aq._split(p), *action.element(s))
        return np.concatenate([z, w])

    def project(p, tol, max_iter):
        return aq.project_real_slice(params, p, tol, max_iter)

    def hol_volume(p, frame):
        e1, e2 = (aq.horizontal_project(p, e) for e in frame)
        return aq.omega_c(e1, e2)

    return AmbientModel(
        name=f"ale(n={params.n}, a={action.a}, b={action.b})",
        dim_real=4,
        metric_at=lambda p, u, v: aq.quotient_metric_raw(p, u, v),
        cplx_I1_at=lambda p, v: 1j * aq.horizontal_project(p, v),
        omega1_at=lambda p, u, v: real_inner(1j * aq.horizontal_project(p, u),
                                             aq.horizontal_project(p, v)),
        hol_volume_at=hol_volume,
        action_generator_at=generator,
        moment_at=lambda p: ale_moment(params, action, p),
        a_H=action.a_H,
        tangent_basis_at=aq.horizontal_basis,
        act=act,
        project=project,
    )


def holomorphic_weight_check(action, p, s):
    """max |ω_ℂ(h_*u, h_*v) − e^{ias} ω_ℂ(u, v)| over horizontal basis pairs, h = Exp(s w_{a,b})."""
    g0, g1 = action.element(s)
    basis = aq.horizontal_basis(p)

    def push(v):
        z, w = aq.act_G_arrays(*aq._split(v), g0, g1)
        return np.concatenate([z, w])

    worst = 0.0
    phase = np.exp(1j * action.a * s)
    for i, u in enumerate(basis):
        for v in basis[i + 1:]:
            worst = max(worst, abs(aq.omega_c(push(u), push(v)) - phase * aq.omega_c(u, v)))
    return worst


# ---------------------------------------------------------------------------
# Singular times
# ---------------------------------------------------------------------------

def vertex_times(params, action, c0):
    """t_k = (c₀ − (a x_k + b y_k))/a for each vertex v_k of Δ.

    Raises:
        OnFixedLevel: If c₀ is the level of some vertex
    """
    delta = aq.polygon(params)
    levels = [action.a * x + action.b * y for x, y in delta.vertices]
    for k, lv in enumerate(levels):
        if abs(c0 - lv) <= 1e-12 * (1.0 + abs(c0)):
            raise OnFixedLevel(f"level {c0} contains the fixed point P_{k}", k=k)
    if action.a == 0:
        return [math.inf] * len(levels)
    return [(c0 - lv) / action.a for lv in levels]


def extinction_time(model, c0, params=None):
    """First time the level c_t becomes singular; inf when it never does.

    Args:
        model: ShrinkerModel, TranslatorModel or SubtorusAction (with params)
        c0: Initial level
        params: AleParams for the ALE case
    """
    if isinstance(model, ShrinkerModel):
        a_H = shrinker_aH(model)
        if a_H == 0 or c0 == 0:
            return math.inf
        t = c0 / a_H
        return t if t > 0 else math.inf
    if isinstance(model, TranslatorModel):
        return math.inf
    if isinstance(model, SubtorusAction):
        positive = [t for t in vertex_times(params, model, c0) if 0 < t < math.inf]
        return min(positive, default=math.inf)
    raise TypeError(f"unsupported model {model!r}")


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def rk4_step(model, p, h):
    """One classical Runge-Kutta step of dγ/dt = χ."""
    k1 = chi_general(model, p)
    k2 = chi_general(model, p + 0.5 * h * k1)
    k3 = chi_general(model, p + 0.5 * h * k2)
    k4 = chi_general(model, p + h * k3)
    return p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def time_grid(t0, t_end, step, singular_time=None):
    """Recorded times from t0 to t_end; steps shrink geometrically approaching the singular time."""
    times = [t0]
    t = t0
    while t < t_end:
        nxt = t + step
        if singular_time is not None and math.isfinite(singular_time):
            nxt = min(nxt, t + (singular_time - t) / STEP_DIVISOR)
        if t_end - nxt <= 1e-9 * step:
            nxt = t_end
        nxt = min(nxt, t_end)
        if nxt <= t:
            break
        times.append(nxt)
        t = nxt
    return times


def _integrate_seed(model, seed, times, cfg, index):
    p = np.asarray(seed, dtype=complex)
    states = [p]
    pre = [model.moment_at(p)]
    post = [pre[0]]
    max_iter = 0
    for t, t_next in zip(times, times[1:]):
        try:
            q = rk4_step(model, p, t_next - t)
            pre.append(model.moment_at(q))
            if model.project is not None:
                q, iterations = model.project(q, cfg.projection_tol, cfg.max_newton)
                max_iter = max(max_iter, iterations)
        except (FixedPointHit, ProjectionFailure) as e:
            e.details.update(seed_index=index, t=t_next, step=t_next - t)
            logger.error(f"Seed {index} failed at t={t_next}: {e}")
            raise
        p = q
        states.append(p)
        post.append(model.moment_at(p))
    return states, pre, post, max_iter


def _reseed_flags(rows, groups):
    first = rows[0]
    flagged = set()
    for j in range(first.shape[0] - 1):
        if groups is not None and groups[j] != groups[j + 1]:
            continue
        d0 = float(np.linalg.norm(first[j + 1] - first[j]))
        if d0 == 0:
            continue
        for row in rows[1:]:
            if float(np.linalg.norm(row[j + 1] - row[j])) > RESEED_FACTOR * d0:
                flagged.update({j, j + 1})
                break
    return tuple(sorted(flagged))


def integrate_flow(model, c0, horizon, cfg, seeds, singular_time=None, workers=1,
                   t0=0.0, tags=()):
    """Integrate the seeds of V_{c₀} by RK4 with per-step constraint projection.

    Args:
        model: AmbientModel
        c0: Level of the seeds at time t0
        horizon: Final time
        cfg: IntegratorConfig
        seeds: Sequence of points of V_{c₀}
        singular_time: First singular time, if any; the flow halts at
            t0 + (singular_time − t0)·(1 − stop_margin)
        workers: Thread count for independent seeds
        t0: Start time; c₀ is the level at t0
        tags: Optional group label per seed (sheets); reseed checks stay within a group

    Returns:
        FlowTrajectory

    Raises:
        FixedPointHit: If a trajectory reaches a zero of the generator
        ProjectionFailure: If the Newton projection diverges
    """
    seeds = [np.asarray(s, dtype=complex) for s in seeds]
    if not seeds:
        raise EmptyLevel("no seeds to integrate")
    halt, reason = float(horizon), "horizon"
    if singular_time is not None and t0 < singular_time < math.inf:
        stop = t0 + (singular_time - t0) * (1.0 - cfg.stop_margin)
        if stop < halt:
            halt, reason = stop, "singular"
    # the seeds sit on the level c₀ at time t0
    c_start = c0 + t0 * model.a_H

    if model.a_H == 0:
        times = [t0] if halt <= t0 else [t0, halt]
    else:
        times = time_grid(t0, halt, cfg.step, singular_time)
    logger.info(f"Integrating {len(seeds)} seeds of {model.name} over {len(times) - 1} steps "
                f"to t={halt} ({reason})")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda item: _integrate_seed(model, item[1], times, cfg, item[0]),
                                enumerate(seeds)))

    samples = [np.array([res[0][k] for res in results]) for k in range(len(times))]
    pre = np.array([res[1] for res in results]).T
    post = np.array([res[2] for res in results]).T
    flags = _reseed_flags(samples, list(tags) if tags else None)
    if flags:
        logger.warning(f"Seeds {list(flags)} separated by more than {RESEED_FACTOR}x; reseed advised")

    trajectory = FlowTrajectory(
        model=model,
        c0=c_start,
        times=tuple(times),
        samples=samples,
        moments=post,
        pre_moments=pre,
        halt_reason=reason,
        singular_time=singular_time,
        reseed_flags=flags,
        newton_iterations=max((res[3] for res in results), default=0),
        tags=tuple(tags),
        cfg=cfg,
    )
    logger.debug(f"Max drift residual {max(trajectory.drift_residuals):.3e}")
    return trajectory


def reseed(params, action, trajectory, count, sheets=aq.SHEETS, time_index=-1):
    """Fresh real-slice seeds on V_{c_t} at a recorded time of the trajectory."""
    t = trajectory.times[time_index]
    c_t = trajectory.c0 - t * action.a_H
    seeds = aq.ale_level_sample(params, action.a, action.b, c_t, count, sheets)
    logger.info(f"Reseeded {len(seeds)} points on level {c_t} at t={t}")
    return t, c_t, seeds


# ---------------------------------------------------------------------------
# Product immersion F_t(p, h) = γ_p(t)·h
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImmersionCloud:
    """Points of Im F_t tagged with (seed index, group parameter)."""

    t: float
    points: np.ndarray
    tags: Tuple[Tuple[int, float], ...]


def fiber_parameters(model, fiber_samples, span=2.0):
    """Group parameters: uniform on the circle, or a symmetric window for ℝ-actions."""
    if fiber_samples == 1:
        return [0.0]
    if model.name.startswith("translator"):
        return list(np.linspace(-span, span, fiber_samples))
    return [2.0 * math.pi * j / fiber_samples for j in range(fiber_samples)]


def product_immersion(model, trajectory, t, fiber_samples):
    """Sample Im F_t by acting with group elements on every seed state at time t."""
    states = trajectory.state_at(t)
    points = []
    tags = []
    for i, p in enumerate(states):
        for s in fiber_parameters(model, fiber_samples):
            points.append(model.act(p, s) if s else np.asarray(p))
            tags.append((i, float(s)))
    return ImmersionCloud(t=float(t), points=np.array(points), tags=tuple(tags))


@dataclass(frozen=True)
class MultiplicityReport:
    """Cluster sizes of an immersion cloud in K-invariant coordinates."""

    histogram: dict
    clusters: int

    @property
    def generic(self):
        return max(self.histogram, key=lambda k: (self.histogram[k], k))


def image_multiplicity(params, cloud, tol=1e-8):
    """Group points of Im F_t that coincide in M(α,0), via a KD-tree on quotient invariants."""
    coords = np.array([aq.quotient_invariants(params, p) for p in cloud.points])
    scale = 1.0 + float(np.max(np.abs(coords)))
    tree = cKDTree(coords)
    pairs = tree.query_pairs(tol * scale)

    parent = list(range(len(coords)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        parent[find(i)] = find(j)
    sizes = {}
    for i in range(len(coords)):
        root = find(i)
        sizes[root] = sizes.get(root, 0) + 1
    histogram = {}
    for size in sizes.values():
        histogram[size] = histogram.get(size, 0) + 1
    logger.debug(f"Immersion multiplicity histogram {histogram}")
    return MultiplicityReport(histogram=histogram, clusters=len(sizes))


# ---------------------------------------------------------------------------
# Decay of χ at infinity
# ---------------------------------------------------------------------------

def decay_constants(params, action, radii, count=8):
    """max |χ_p|·|p| over real-slice points with |p| near each radius.

    Points are solve_level lifts of (x, y) = (R²/2)(1, s) for s spread across
    the asymptotic cone of Δ.
    """
    model = ale_ambient(params, action)
    cone = np.linspace(-1.5, 0.9 / (params.n + 1), count)
    out = {}
    for radius in radii:
        worst = 0.0
        for s in cone:
            x, y = 0.5 * radius ** 2, 0.5 * radius ** 2 * s
            delta = aq.polygon(params)
            if not delta.contains(x, y):
                continue
            p = aq.solve_level(params, x, y).as_array()
            chi = chi_general(model, p)
            norm = math.sqrt(model.metric_at(p, chi, chi))
            worst = max(worst, norm * float(np.linalg.norm(p)))
        out[float(radius)] = worst
    return out
