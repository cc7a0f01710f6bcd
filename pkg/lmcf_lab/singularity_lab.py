"""Singularities of the H_{a,b}-invariant flows on M(α,0).

The level c_t = c₀ − t·a reaches the level of a fixed point P_k at
t_k = (c₀ − (a x_k + b y_k))/a. Near the first such P_{k0}, the flow
rescaled by √(t_{k0} − t) converges to the flat self-shrinker with weights
λ₁ = a(n+1−k0)+b and λ₂ = −a(n−k0)−b.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from . import ale_quotient as aq
from .curvature_oracle import (
    ImmersedPatch,
    second_fundamental_form_chart,
    second_fundamental_form_flat,
)
from .errors import EmptyLevel, EmptyWindow, FixedPointHit, OutsideChart, ProjectionFailure
from .flat_models import ShrinkerModel, level_parametrization
from .flow_engine import SubtorusAction, chi_general, integrate_flow, vertex_times
from .utils import json_number, setup_logging

logger = setup_logging()

CASES = ("slope_positive", "slope_intermediate", "slope_steep", "static")
# Polylines are resampled this many times per segment before nearest-point queries
DENSIFY = 12
# Rescaled gap between neighbouring flow samples inside the window
SPACING = 0.3
# Polylines are split where neighbours are further apart than GAP_FACTOR·spacing
GAP_FACTOR = 4.0
# The zoom starts at t_{k0} − ZOOM_START·τ for the largest τ
ZOOM_START = 2.0
REFINE_ROUNDS = 12
# Newton steps along χ that put a bisection midpoint back on the level
LEVEL_STEPS = 8


@dataclass(frozen=True)
class SingularSchedule:
    """Vertex times t_0..t_n and the case classification of (a, b)."""

    times: Tuple[float, ...]
    case: str
    k0: Optional[int] = None
    m0: Optional[int] = None
    i0: Optional[int] = None
    j0: Optional[int] = None

    @property
    def first_time(self):
        if self.k0 is None:
            return math.inf
        return self.times[self.k0]

    def as_dict(self):
        return {
            "times": [json_number(t) for t in self.times],
            "case": self.case,
            "k0": self.k0,
            "m0": self.m0,
            "i0": self.i0,
            "j0": self.j0,
            "first_time": json_number(self.first_time),
        }


def classify_slope(action):
    """Case tag from the sign and size of b/a; exact rational arithmetic."""
    if action.a == 0:
        return "static"
    ratio = Fraction(action.b, action.a)
    if ratio > 0:
        return "slope_positive"
    if ratio > -(action.n + 1):
        return "slope_intermediate"
    return "slope_steep"


def peak_index(action):
    """m₀ with n + b/a < m₀ < n + 1 + b/a, for the intermediate case."""
    ratio = Fraction(action.b, action.a)
    m0 = math.ceil(action.n + ratio)
    if not (action.n + ratio < m0 < action.n + 1 + ratio):
        raise ValueError(f"no integer strictly inside the window for (a, b) = ({action.a}, {action.b})")
    return m0


def singular_times(params, action, c0):
    """Schedule of singular times for the flow starting at level c₀.

    Raises:
        OnFixedLevel: If c₀ is the level of a fixed point
    """
    case = classify_slope(action)
    if case == "static":
        # the level of a fixed point is still rejected
        vertex_times(params, action, c0)
        return SingularSchedule(times=(), case="static")

    times = tuple(vertex_times(params, action, c0))
    positive = [k for k, t in enumerate(times) if t > 0]
    k0 = min(positive, key=lambda k: times[k]) if positive else None
    m0 = i0 = j0 = None
    if case == "slope_intermediate":
        m0 = peak_index(action)
        if positive:
            i0 = min(positive)
            j0 = max(positive) + 1
    logger.info(f"Schedule for H_{{{action.a},{action.b}}} at c0={c0}: case={case}, k0={k0}, m0={m0}")
    return SingularSchedule(times=times, case=case, k0=k0, m0=m0, i0=i0, j0=j0)


@dataclass(frozen=True)
class BlowupWeights:
    lam1: int
    lam2: int
    k0: int

    @property
    def shrinker(self):
        return ShrinkerModel((self.lam1, self.lam2))

    def as_dict(self):
        return {"lambda1": self.lam1, "lambda2": self.lam2, "k0": self.k0}


def blowup_weights(n, action, k0):
    """λ₁ = a(n+1−k0)+b and λ₂ = −a(n−k0)−b."""
    if not 0 <= k0 <= n:
        raise ValueError(f"k0 must lie in 0..{n}, got {k0}")
    return BlowupWeights(lam1=action.a * (n + 1 - k0) + action.b,
                         lam2=-action.a * (n - k0) - action.b, k0=k0)


# ---------------------------------------------------------------------------
# Rescaled slices
# ---------------------------------------------------------------------------

def quadric_branches(weights, level, window, count):
    """Real points of ½λ₁v₁² + ½λ₂v₂² = level with |v| ≤ window, one array per branch."""
    model = weights.shrinker
    curve, _ = level_parametrization(model, level)
    lam = np.array([weights.lam1, weights.lam2], dtype=float)
    if np.all(lam > 0) or np.all(lam < 0):
        thetas = np.linspace(0.0, 2 * math.pi, count + 1)
        return [np.array([curve([th]).real for th in thetas])]

    major = 0 if np.sign(level) == np.sign(lam[0]) else 1
    minor = 1 - major
    scale = math.sqrt(2.0 * abs(level) / abs(lam[minor]))
    s_max = math.asinh(window / scale)
    branches = []
    for sign in (1.0, -1.0):
        pts = np.array([curve([s]).real for s in np.linspace(-s_max, s_max, count)])
        pts[:, major] *= sign
        branches.append(pts)
    return branches


def _densify(branch):
    if len(branch) < 2:
        return branch
    steps = np.linspace(0.0, 1.0, DENSIFY, endpoint=False)
    pieces = [a + np.outer(steps, b - a) for a, b in zip(branch[:-1], branch[1:])]
    return np.vstack(pieces + [branch[-1:]])


def _within(points, radius):
    return points[np.linalg.norm(points, axis=1) <= radius]


def hausdorff_window(slice_branches, target_branches, window):
    """Symmetric max-min distance on |v| ≤ window; the other set is taken on |v| ≤ window + 1."""
    def cloud(branches, radius):
        dense = [_within(_densify(b), radius) for b in branches if len(b)]
        dense = [d for d in dense if len(d)]
        return np.vstack(dense) if dense else np.zeros((0, 2))

    a_in = cloud(slice_branches, window)
    b_in = cloud(target_branches, window)
    a_out = cloud(slice_branches, window + 1.0)
    b_out = cloud(target_branches, window + 1.0)
    if not len(a_in) or not len(b_out) or not len(b_in) or not len(a_out):
        raise EmptyWindow(f"no points within |v| <= {window}")
    forward = float(np.max(cKDTree(b_out).query(a_in)[0]))
    backward = float(np.max(cKDTree(a_out).query(b_in)[0]))
    return max(forward, backward)


@dataclass(frozen=True)
class BlowupStage:
    """Flow samples near P_{k0} at t = t_{k0} − τ, as chains running along V_{c_t} ∩ M^σ."""

    tau: float
    t: float
    level: float
    chains: Tuple[np.ndarray, ...]
    inserted: int = 0

    @property
    def sample_count(self):
        return sum(len(chain) for chain in self.chains)

    def chart_runs(self, params, k0, scale=1.0):
        """Real chart coordinates of each chain divided by scale, split where a sample leaves the chart."""
        runs = []
        for chain in self.chains:
            current = []
            for p in chain:
                v = _real_chart(params, k0, p)
                if v is None:
                    if current:
                        runs.append(np.array(current))
                    current = []
                    continue
                current.append(v / scale)
            if current:
                runs.append(np.array(current))
        return runs


def _real_chart(params, k0, p):
    try:
        u = aq.local_chart(params, k0, p)
    except OutsideChart:
        return None
    return np.array([u[0].real, u[1].real])


def _segment_distance(a, b):
    """Distance from the chart origin to the chord [a, b]."""
    d = b - a
    length2 = float(d @ d)
    s = 0.0 if length2 == 0 else min(1.0, max(0.0, -float(a @ d) / length2))
    return float(np.linalg.norm(a + s * d))


def _align(q, p, n):
    """ζ·q for the real element ζ of K closest to p."""
    z, w = aq._split(q)
    best, closest = math.inf, q
    for signs in itertools.product((1.0, -1.0), repeat=n):
        zeta = np.append(signs, np.prod(signs))
        candidate = np.concatenate([z * zeta, w * zeta])
        d = float(np.linalg.norm(candidate - p))
        if d < best:
            best, closest = d, candidate
    return closest


def _onto_level(model, q, c, cfg):
    """Move a real-slice candidate onto V_c by Newton steps along χ, reprojecting after each.

    Raises:
        ProjectionFailure: If the level is not reached within LEVEL_STEPS
    """
    q, _ = model.project(q, cfg.projection_tol, cfg.max_newton)
    gap = model.moment_at(q) - c
    for _ in range(LEVEL_STEPS):
        if abs(gap) <= aq.MOMENT_TOL * (1.0 + abs(c)):
            return q
        # dμ_H(χ) = −a_H
        q = q + (gap / model.a_H) * chi_general(model, q)
        q, _ = model.project(q, cfg.projection_tol, cfg.max_newton)
        gap = model.moment_at(q) - c
    if abs(gap) <= aq.MOMENT_TOL * (1.0 + abs(c)):
        return q
    raise ProjectionFailure("midpoint did not reach the level", level=c, residual=float(gap))


def _sheet_runs(trajectory, t):
    """Flow samples at t grouped by tag, each run in sampling order along r_c."""
    states = trajectory.state_at(t)
    tags = trajectory.tags or ("",) * len(states)
    runs = {}
    for p, tag in zip(states, tags):
        runs.setdefault(tag, []).append(np.asarray(p, dtype=complex))
    return runs


def _glued_chains(params, action, level, runs):
    """Join sheet runs that meet over a finite endpoint of r_c.

    The first sample of each run is the one nearest the finite end (s_lo when
    bounded). Over an endpoint on l_k, sheet s meets s·g_k.
    """
    segment = aq.level_segment(params, action.a, action.b, level)
    if segment.bounded:
        head, tail = segment.s_lo, segment.s_hi
    elif math.isfinite(segment.s_hi):
        head, tail = segment.s_hi, None
    elif math.isfinite(segment.s_lo):
        head, tail = segment.s_lo, None
    else:
        head = tail = None
    delta = aq.polygon(params)

    links = {}
    for sheet in runs:
        for end, s in (("head", head), ("tail", tail)):
            if s is None or sheet not in aq.SHEET_SIGNS:
                continue
            k = delta.edge_index(segment.point(s)[1])
            g = [e for e in aq.edge_stabilizer(params.n, k) if e != (1, 1)][0]
            other = aq.sheet_times(sheet, g)
            if other in runs and other != sheet:
                links[(sheet, end)] = (other, end)

    seen = set()

    def walk(sheet, entry):
        first, points = sheet, []
        while True:
            seen.add(sheet)
            run = runs[sheet] if entry == "head" else runs[sheet][::-1]
            points.extend(run)
            leave = "tail" if entry == "head" else "head"
            nxt = links.get((sheet, leave))
            if nxt is None:
                break
            sheet, entry = nxt
            if sheet in seen:
                if sheet == first:
                    points.append(points[0])
                break
        return np.array(points)

    chains = []
    for sheet in runs:
        free = [end for end in ("head", "tail") if (sheet, end) not in links]
        if sheet not in seen and free:
            chains.append(walk(sheet, free[0]))
    for sheet in runs:
        if sheet not in seen:
            chains.append(walk(sheet, "head"))
    return chains


def _refine(params, model, cfg, chain, level, k0, radius, spacing):
    """Bisect neighbouring samples whose chord meets |u| ≤ radius until they are spacing apart.

    Returns:
        tuple: (list of samples, number inserted)
    """
    points = list(chain)
    inserted = 0
    for _ in range(REFINE_ROUNDS):
        coords = [_real_chart(params, k0, p) for p in points]
        out, added = [points[0]], 0
        for p, q, a, b in zip(points, points[1:], coords, coords[1:]):
            if (a is not None and b is not None and np.linalg.norm(b - a) > spacing
                    and _segment_distance(a, b) <= radius):
                try:
                    mid = _onto_level(model, 0.5 * (p + _align(q, p, params.n)), level, cfg)
                except (FixedPointHit, ProjectionFailure) as e:
                    logger.debug(f"Midpoint skipped: {e}")
                    mid = None
                m = None if mid is None else _real_chart(params, k0, mid)
                chord = np.linalg.norm(b - a)
                if m is not None and np.linalg.norm(m - a) < chord and np.linalg.norm(m - b) < chord:
                    out.append(mid)
                    added += 1
            out.append(q)
        points = out
        inserted += added
        if not added:
            break
    return points, inserted


def _trim(params, k0, chain, radius):
    """Pieces of a chain made of samples on a chord that meets |u| ≤ radius."""
    coords = [_real_chart(params, k0, p) for p in chain]
    near_chord = [a is not None and b is not None and _segment_distance(a, b) <= radius
                  for a, b in zip(coords, coords[1:])]
    pieces, current = [], []
    for i, p in enumerate(chain):
        v = coords[i]
        keep = (v is not None and np.linalg.norm(v) <= radius
                or (i > 0 and near_chord[i - 1]) or (i < len(near_chord) and near_chord[i]))
        if keep:
            current.append(p)
        elif current:
            pieces.append(np.array(current))
            current = []
    if current:
        pieces.append(np.array(current))
    return pieces


def zoom_flow(params, action, trajectory, k0, taus, window=5.0, spacing=SPACING, t_singular=None,
              workers=1):
    """Continue the flow samples of a trajectory toward P_{k0}, one stage per τ.

    Stages start a factor ZOOM_START of the largest τ before t_{k0}, or at the
    trajectory end if that is earlier. Each stage bisects neighbouring samples
    near P_{k0} (midpoints are put back on the current level), drops samples far
    from P_{k0} and integrates the rest to t_{k0} − τ.

    Args:
        params: AleParams
        action: SubtorusAction with a ≠ 0
        trajectory: FlowTrajectory of the real slice, tagged by sheet
        k0: Index of the fixed point
        taus: Rescaling times t_{k0} − t
        window: Rescaled radius that has to stay populated
        spacing: Largest rescaled gap between neighbouring samples inside the window
        t_singular: t_{k0}; defaults to the trajectory's singular time
        workers: Thread count for integrate_flow

    Returns:
        list: BlowupStage per τ, largest τ first

    Raises:
        ValueError: If a τ is not positive or t_{k0} − τ precedes the trajectory
        EmptyWindow: If no flow sample comes near P_{k0}
    """
    t_k0 = trajectory.singular_time if t_singular is None else t_singular
    taus = sorted((float(tau) for tau in taus), reverse=True)
    if t_k0 is None or not math.isfinite(t_k0):
        raise ValueError("no singular time to rescale around")
    if not taus or taus[-1] <= 0:
        raise ValueError(f"times must be before the singular time {t_k0}, got tau={taus}")
    first = t_k0 - taus[0]
    if first < trajectory.times[0] - 1e-12:
        raise ValueError(f"t={first} precedes the trajectory start {trajectory.times[0]}")
    t = min(max(trajectory.times[0], t_k0 - ZOOM_START * taus[0]), trajectory.times[-1], first)
    model = trajectory.model
    cfg = trajectory.cfg
    chains = _glued_chains(params, action, trajectory.c0 - t * action.a_H, _sheet_runs(trajectory, t))

    stages = []
    for tau in taus:
        level = trajectory.c0 - t * action.a_H
        root = math.sqrt(tau)
        radius = (window + 1.0) * root + math.sqrt(t_k0 - t)
        pieces, inserted = [], 0
        for chain in chains:
            points, added = _refine(params, model, cfg, chain, level, k0, radius,
                                    0.5 * spacing * root)
            pieces.extend(_trim(params, k0, points, radius))
            inserted += added
        if not pieces:
            raise EmptyWindow(f"no flow samples near P_{k0} at t={t}")

        t_next = t_k0 - tau
        if t_next > t:
            flow = integrate_flow(model, level, t_next, cfg, [p for piece in pieces for p in piece],
                                  singular_time=t_k0, workers=workers, t0=t,
                                  tags=tuple(str(i) for i, piece in enumerate(pieces) for _ in piece))
            final, start = flow.samples[-1], 0
            chains = []
            for piece in pieces:
                chains.append(final[start:start + len(piece)])
                start += len(piece)
            t = flow.times[-1]
        else:
            chains = pieces
        stage = BlowupStage(tau=tau, t=t, level=trajectory.c0 - t * action.a_H,
                            chains=tuple(chains), inserted=inserted)
        logger.info(f"Zoom stage tau={tau}: {stage.sample_count} flow samples near P_{k0}, "
                    f"{inserted} inserted")
        stages.append(stage)
    return stages


@dataclass(frozen=True)
class RescaledSlice:
    """Flow samples of V_{c_t} ∩ M^σ near P_{k0} in chart coordinates divided by √τ."""

    tau: float
    level: float
    branches: List[np.ndarray]
    target: List[np.ndarray]
    distance: float
    flow_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def points(self):
        return np.vstack([b for b in self.branches if len(b)]) if self.branches else np.zeros((0, 2))


def _distinct(run):
    if len(run) < 2:
        return run
    steps = np.linalg.norm(np.diff(run, axis=0), axis=1)
    return run[np.concatenate([[True], steps > 0])]


def _split_gaps(run, gap):
    cuts = np.nonzero(np.linalg.norm(np.diff(run, axis=0), axis=1) > gap)[0] + 1
    return [piece for piece in np.split(run, cuts) if len(piece)]


def _chord_lengths(run):
    return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(run, axis=0), axis=1))])


def _smooth(run):
    """Cubic spline through a polyline by chord length, DENSIFY points per interval."""
    run = _distinct(run)
    if len(run) < 4:
        return run
    sigma = _chord_lengths(run)
    spline = CubicSpline(sigma, run, axis=0)
    return spline(np.linspace(0.0, sigma[-1], DENSIFY * (len(run) - 1) + 1))


def rescaled_slice(params, action, trajectory, t, k0, sample_count=200, window=5.0,
                   t_singular=None, spacing=SPACING, stage=None, workers=1):
    """Map the flow samples near P_{k0} through the chart, divide by √τ and compare with the limit quadric.

    Without a ``stage`` from zoom_flow the trajectory is first continued to t.

    Raises:
        ValueError: If t is not before the singular time
        EmptyWindow: If no flow sample falls within the window
    """
    t_k0 = trajectory.singular_time if t_singular is None else t_singular
    tau = stage.tau if stage is not None else t_k0 - t
    if tau <= 0:
        raise ValueError(f"t={t} is not before the singular time {t_k0}")
    if stage is None:
        stage = zoom_flow(params, action, trajectory, k0, (tau,), window, spacing, t_k0, workers)[0]
    weights = blowup_weights(params.n, action, k0)
    target = quadric_branches(weights, float(action.a), window + 1.0, sample_count)
    root = math.sqrt(tau)

    runs = stage.chart_runs(params, k0, root)
    flow_points = _within(np.vstack(runs), window) if runs else np.zeros((0, 2))
    if not len(flow_points):
        raise EmptyWindow(f"no flow samples near P_{k0} at tau={tau}")
    branches = [_smooth(piece) for run in runs for piece in _split_gaps(run, GAP_FACTOR * spacing)]
    distance = hausdorff_window(branches, target, window)
    logger.debug(f"Rescaled slice at tau={tau}: distance {distance:.3e}, "
                 f"{len(flow_points)} flow samples in window")
    return RescaledSlice(tau=tau, level=stage.level, branches=branches, target=target,
                         distance=distance, flow_points=flow_points)


# ---------------------------------------------------------------------------
# Type-I statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeIStatistic:
    """(τ, sup|A_t|, sup|A_t|·√τ) with τ = t_{k0} − t decreasing."""

    series: Tuple[Tuple[float, float, float], ...]

    @property
    def products(self):
        return [row[2] for row in self.series]

    def variation(self, last=None):
        """(max − min)/max of the products, optionally over the last entries only."""
        prods = self.products[-last:] if last else self.products
        return (max(prods) - min(prods)) / max(prods)

    def as_dict(self):
        return {"series": [{"tau": tau, "sup_A": a, "product": p} for tau, a, p in self.series]}


def ball_angles(weights, level, radius, count):
    angles = []
    for branch in quadric_branches(weights, level, radius, 4 * count):
        inside = _within(branch, radius)
        if len(inside):
            picks = np.linspace(0, len(inside) - 1, min(count, len(inside))).round().astype(int)
            angles.extend(math.atan2(v[1], v[0]) for v in inside[np.unique(picks)])
    return angles


def _orbit_curvatures(params, k0, weights, piece, root, radius_factor, count):
    """|A| at samples of one run inside B(P_{k0}; √τ·R), on the H-orbit swept by its spline."""
    piece = _distinct(piece)
    if len(piece) < 4:
        return []
    radii = np.linalg.norm(piece, axis=1)
    inside = [i for i in range(1, len(piece) - 1) if radii[i] <= radius_factor * root]
    if not inside:
        return []
    sigma = _chord_lengths(piece) / root
    sigma = sigma - sigma[int(np.argmin(radii))]
    profile = CubicSpline(sigma, piece, axis=0)
    lam1, lam2 = weights.lam1, weights.lam2

    def F(u):
        x1, x2 = profile(float(u[0]))
        s = float(u[1])
        return np.array([x1 * np.exp(1j * lam1 * s), x2 * np.exp(1j * lam2 * s)])

    patch = ImmersedPatch(parametrization=F, dim=2, box=((sigma[0], sigma[-1]), (0.0, 2 * math.pi)),
                          params=params, k0=k0, step=1e-3)
    picks = np.linspace(0, len(inside) - 1, min(count, len(inside))).round().astype(int)
    # the sample nearest P_{k0} sits by the vertex of the profile
    chosen = {inside[j] for j in picks} | {min(inside, key=lambda i: radii[i])}
    values = []
    for i in sorted(chosen):
        try:
            values.append(second_fundamental_form_chart(patch, np.array([sigma[i], 0.0])))
        except OutsideChart:
            continue
    return values


def type_one_statistic(params, action, trajectory, k0, radius_factor, taus, angle_count=6,
                       t_singular=None, spacing=SPACING, stages=None, workers=1):
    """sup |A_t| over B(P_{k0}; √τ·R) ∩ Im F_t for each τ, measured with the chart metric.

    Im F_t near P_{k0} is the H-orbit of a cubic spline through the zoomed
    flow samples of each run; |A| is evaluated at samples inside the ball.

    Raises:
        EmptyWindow: If the ball misses the flow samples for some τ
    """
    t_k0 = trajectory.singular_time if t_singular is None else t_singular
    if stages is None:
        stages = zoom_flow(params, action, trajectory, k0, taus, radius_factor, spacing, t_k0,
                           workers)
    weights = blowup_weights(params.n, action, k0)
    series = []
    for stage in sorted(stages, key=lambda s: -s.tau):
        root = math.sqrt(stage.tau)
        values = []
        for run in stage.chart_runs(params, k0):
            for piece in _split_gaps(run, GAP_FACTOR * spacing * root):
                values.extend(_orbit_curvatures(params, k0, weights, piece, root, radius_factor,
                                                angle_count))
        if not values:
            raise EmptyWindow(f"ball of radius {radius_factor}*sqrt(tau) misses Im F_t "
                              f"at tau={stage.tau}")
        sup = max(values)
        series.append((float(stage.tau), sup, sup * root))
        logger.debug(f"Type-I tau={stage.tau}: sup|A|={sup:.4e}, product={sup * root:.4e}")
    return TypeIStatistic(series=tuple(series))


def flat_type_one_statistic(weights, taus, radius_factor, angle_count=6, level=1.0):
    """The same statistic for the flat self-shrinker level ½Σλv² = level·τ."""
    lam = (weights.lam1, weights.lam2)
    base_angles = ball_angles(weights, level, radius_factor, angle_count)
    series = []
    for tau in sorted(taus, reverse=True):
        c = level * tau
        scale = np.sqrt(2.0 * abs(c) / np.abs(np.asarray(lam, dtype=float)))

        def F(u, scale=scale):
            theta, s = float(u[0]), float(u[1])
            # radial form of the quadric: r(θ)² = 2c / (λ₁cos²θ + λ₂sin²θ)
            denom = lam[0] * math.cos(theta) ** 2 + lam[1] * math.sin(theta) ** 2
            r = math.sqrt(2.0 * c / denom)
            return np.array([r * math.cos(theta) * np.exp(1j * lam[0] * s),
                             r * math.sin(theta) * np.exp(1j * lam[1] * s)])

        patch = ImmersedPatch(parametrization=F, dim=2, step=1e-3)
        sup = max(second_fundamental_form_flat(patch, np.array([theta, 0.0])) for theta in base_angles)
        series.append((float(tau), sup, sup * math.sqrt(tau)))
    return TypeIStatistic(series=tuple(series))


# ---------------------------------------------------------------------------
# Component census and reconnection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Census:
    """Connected components of V_c as unions of sheet pieces."""

    level: float
    components: Tuple[Tuple[str, ...], ...]
    topology: str
    endpoint_edges: Tuple[int, ...]

    @property
    def count(self):
        return len(self.components)

    def as_dict(self):
        return {"level": self.level, "components": [list(c) for c in self.components],
                "topology": self.topology, "endpoint_edges": list(self.endpoint_edges)}


def component_census(params, action, c0):
    """Components of V_{c0} from the endpoints of r_{c0} and the sheet gluing along edges.

    Raises:
        OnFixedLevel: If r_{c0} passes through a vertex
        EmptyLevel: If V_{c0} is empty
    """
    vertex_times(params, action, c0)
    segment = aq.level_segment(params, action.a, action.b, c0)
    delta = aq.polygon(params)
    edges = tuple(delta.edge_index(y) for _, y in segment.endpoints())

    parent = {s: s for s in aq.SHEETS}

    def find(s):
        while parent[s] != s:
            s = parent[s]
        return s

    for k in edges:
        g = [e for e in aq.edge_stabilizer(params.n, k) if e != (1, 1)][0]
        for s in aq.SHEETS:
            parent[find(s)] = find(aq.sheet_times(s, g))

    groups = {}
    for s in aq.SHEETS:
        groups.setdefault(find(s), []).append(s)
    components = tuple(sorted(tuple(sorted(g, key=aq.SHEETS.index)) for g in groups.values()))
    topology = "S1" if segment.bounded else "R"
    logger.debug(f"Census at c={c0}: {len(components)} components ({topology}), edges {edges}")
    return Census(level=float(c0), components=components, topology=topology, endpoint_edges=edges)


def reconnection_report(params, action, c0, offset=1e-3):
    """Census just before and just after the first singular time."""
    schedule = singular_times(params, action, c0)
    if schedule.k0 is None:
        return {"schedule": schedule.as_dict(), "before": None, "after": None}
    t_k0 = schedule.first_time
    report = {"schedule": schedule.as_dict()}
    for label, t in (("before", t_k0 - offset), ("after", t_k0 + offset)):
        level = c0 - t * action.a_H
        try:
            report[label] = component_census(params, action, level).as_dict()
        except EmptyLevel:
            report[label] = {"level": level, "components": [], "topology": "empty",
                             "endpoint_edges": []}
    weights = blowup_weights(params.n, action, schedule.k0)
    report["local_model"] = weights.as_dict()
    report["local_model"]["shape"] = "ellipse" if weights.lam1 * weights.lam2 > 0 else "hyperbola"
    return report


# ---------------------------------------------------------------------------
# Sign proposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignRecord:
    a: int
    b: int
    n: int
    m0: int
    ok: bool


def sign_grid(max_a=5, max_n=4):
    """Check λ^{(m0)} > 0 componentwise and λ₁λ₂ < 0 at every other vertex.

    Covers coprime a ≤ max_a, n ≤ max_n and b with b/a ∈ (−(n+1), 0) non-integer.
    """
    records = []
    for n in range(1, max_n + 1):
        for a in range(1, max_a + 1):
            for b in range(-(n + 1) * a + 1, 0):
                if math.gcd(a, abs(b)) != 1 or b % a == 0:
                    continue
                action = SubtorusAction(a=a, b=b, n=n)
                m0 = peak_index(action)
                ok = True
                for k in range(n + 1):
                    w = blowup_weights(n, action, k)
                    if k == m0:
                        ok &= w.lam1 > 0 and w.lam2 > 0
                    else:
                        ok &= w.lam1 * w.lam2 < 0
                records.append(SignRecord(a=a, b=b, n=n, m0=m0, ok=ok))
    logger.info(f"Sign grid: {sum(r.ok for r in records)}/{len(records)} pass")
    return records


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class SingularityReport:
    schedule: SingularSchedule
    weights: Optional[BlowupWeights]
    distances: List[Tuple[float, float]]
    type_one: Optional[TypeIStatistic]
    census: Optional[Census] = None
    reconnection: Optional[dict] = None

    @property
    def distances_decreasing(self):
        values = [d for _, d in sorted(self.distances, reverse=True)]
        return all(b < a for a, b in zip(values, values[1:]))

    def as_dict(self):
        return {
            "schedule": self.schedule.as_dict(),
            "weights": self.weights.as_dict() if self.weights else None,
            "distance_series": [{"tau": tau, "distance": d} for tau, d in self.distances],
            "distance_decreasing": self.distances_decreasing,
            "type_one": self.type_one.as_dict() if self.type_one else None,
            "census": self.census.as_dict() if self.census else None,
            "reconnection": self.reconnection,
        }


def singularity_report(params, action, c0, trajectory, taus, radius_factor=5.0, window=5.0,
                       sample_count=200, angle_count=6, spacing=SPACING, workers=1):
    """Schedule, blow-up weights, rescaled-slice distances and type-I products in one report.

    Both statistics read the same zoomed flow samples.
    """
    schedule = singular_times(params, action, c0)
    if schedule.k0 is None:
        return SingularityReport(schedule=schedule, weights=None, distances=[], type_one=None)
    k0 = schedule.k0
    t_k0 = schedule.first_time
    weights = blowup_weights(params.n, action, k0)
    stages = zoom_flow(params, action, trajectory, k0, taus, max(window, radius_factor), spacing,
                       t_singular=t_k0, workers=workers)
    distances = []
    for stage in stages:
        piece = rescaled_slice(params, action, trajectory, stage.t, k0, sample_count, window,
                               t_singular=t_k0, spacing=spacing, stage=stage)
        distances.append((stage.tau, piece.distance))
    type_one = type_one_statistic(params, action, trajectory, k0, radius_factor, taus,
                                  angle_count, t_singular=t_k0, spacing=spacing, stages=stages)
    return SingularityReport(
        schedule=schedule,
        weights=weights,
        distances=distances,
        type_one=type_one,
        census=component_census(params, action, c0),
        reconnection=reconnection_report(params, action, c0),
    )
