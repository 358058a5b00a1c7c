"""Morphology classification of capillary directrices.

For kappa > 0 every nontrivial profile winds and translates periodically.
For kappa < 0 (canonical start height z0 < 0) the morphology is set by two
thresholds: below -2/sqrt(-kappa) the profile winds; at it the height climbs
asymptotically to zero; between the thresholds the directrix oscillates with
four vertical points per period; above -sqrt(2/(-kappa)) it is a graph.

Inside the oscillating band two further critical start heights split the
shapes: at ``z_tangent`` the directrix first touches itself tangentially, at
``z_closed`` it closes up into a loop; between/below them self-intersections
are transversal and the horizontal drift changes sign.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (InvalidParams, MonotonicityViolation, NoSignChange,
                     NotPeriodic, WrongRegime)
from .ode import IntegratorOptions, integrate

__all__ = [
    "RegimeTag",
    "Regime",
    "PeriodData",
    "VerticalPointRecord",
    "CriticalHeights",
    "DoublePointScan",
    "classify",
    "period",
    "vertical_points",
    "critical_heights",
    "directrix_double_points",
]

_REL_TOL = 1e-12  # relative tolerance for threshold equality decisions


class RegimeTag(enum.Enum):
    FlatLine = "FlatLine"
    SessilePeriodic = "SessilePeriodic"
    PendentPeriodicNegative = "PendentPeriodicNegative"
    PendentAsymptotic = "PendentAsymptotic"
    PendentOscillatingVertical = "PendentOscillatingVertical"
    PendentGraph = "PendentGraph"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    boundary_flags: frozenset = frozenset()

    def to_json_dict(self):
        return {"regime": self.tag.value,
                "boundary_flags": sorted(self.boundary_flags)}


@dataclass(frozen=True)
class PeriodData:
    """Arclength period, horizontal translation per period, winding count,
    and the worst periodicity defect observed over one period."""

    T: float
    translation: float
    winding: int
    residual: float


@dataclass(frozen=True)
class VerticalPointRecord:
    s: float
    z: float
    side: int  # quarter-arc index 0..3 within the period


@dataclass(frozen=True)
class CriticalHeights:
    """Start heights at which the pendent directrix self-touches
    tangentially (z_tangent) and closes up (z_closed); order-free names,
    compare the values to see which is larger."""

    z_tangent: float
    z_closed: float
    bracket_width: float

    def to_json_dict(self):
        return {"z_tangent": self.z_tangent, "z_closed": self.z_closed,
                "bracket_width": self.bracket_width}


@dataclass(frozen=True)
class DoublePointScan:
    """Result of a self-intersection sweep over one period's polyline."""

    has_double_points: bool
    tangential: bool
    crossings: tuple  # ((s_i, s_j, x, z, angle), ...)
    drift: float  # horizontal translation over the scanned period


def _thresholds(kappa):
    t_wind = -2.0 / math.sqrt(-kappa)
    t_graph = -math.sqrt(2.0 / (-kappa))
    return t_wind, t_graph


def classify(z0: float, kappa: float) -> Regime:
    """Morphology tag for the trajectory from height z0.

    z0 is canonicalized through the z -> -z symmetry (nonnegative for
    kappa > 0, nonpositive for kappa < 0); threshold equality is decided at
    relative tolerance 1e-12 and recorded in boundary_flags.
    """
    if kappa == 0 or not math.isfinite(kappa):
        raise InvalidParams("kappa must be finite and nonzero")
    if z0 == 0.0:
        return Regime(RegimeTag.FlatLine)
    if kappa > 0:
        return Regime(RegimeTag.SessilePeriodic)
    zc = -abs(z0)
    t_wind, t_graph = _thresholds(kappa)
    if abs(zc - t_wind) <= _REL_TOL * abs(t_wind):
        return Regime(RegimeTag.PendentAsymptotic,
                      frozenset({"OnAsymptoticBoundary"}))
    if zc < t_wind:
        return Regime(RegimeTag.PendentPeriodicNegative)
    if abs(zc - t_graph) <= _REL_TOL * abs(t_graph):
        return Regime(RegimeTag.PendentGraph, frozenset({"OnGraphBoundary"}))
    if zc < t_graph:
        return Regime(RegimeTag.PendentOscillatingVertical)
    return Regime(RegimeTag.PendentGraph)


def _canonical_z0(z0, kappa):
    return abs(z0) if kappa > 0 else -abs(z0)


def _first_zero(z0, kappa, rel_tol=1e-10, abs_tol=1e-12):
    """Arclength and profile of the first z-zero (oscillating/graph pendent)."""
    s_try = 8.0 / math.sqrt(abs(kappa)) * (1.0 + abs(z0) * math.sqrt(abs(kappa)))
    for _ in range(14):
        opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=abs_tol,
                                 events=("ZZero",))
        prof = integrate(z0, kappa, s_try, opts)
        zeros = prof.events_of("ZZero")
        if zeros:
            return zeros[0].s, prof
        s_try *= 2.0
    raise NotPeriodic(f"no z-zero found up to s = {s_try:.3g}")


def _theta_bisect(prof, target, s_lo, s_hi, tol=1e-13):
    """Arclength where theta crosses ``target`` on an arc where theta is
    strictly monotone between s_lo and s_hi."""
    _, _, th_lo = prof.eval(s_lo)
    _, _, th_hi = prof.eval(s_hi)
    increasing = th_hi[0] > th_lo[0]
    lo, hi = s_lo, s_hi
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        _, _, tm = prof.eval(mid)
        g = tm[0] - target
        if abs(g) <= tol or (hi - lo) <= 1e-16 * max(1.0, hi):
            return mid
        if (g < 0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def period(z0: float, kappa: float, rel_tol: float = 1e-10,
           abs_tol: float = 1e-12) -> PeriodData:
    """Arclength period and horizontal translation vector of the directrix.

    Winding regimes take the first full turn of theta; oscillating and graph
    regimes take four times the first z-zero.  The reported residual is the
    worst defect of alpha(s + T) - alpha(s) - (x(T), 0) over one period.
    """
    regime = classify(z0, kappa)
    tag = regime.tag
    if tag in (RegimeTag.FlatLine, RegimeTag.PendentAsymptotic):
        raise NotPeriodic(f"{tag.value} has no period")
    zc = _canonical_z0(z0, kappa)

    if tag in (RegimeTag.SessilePeriodic, RegimeTag.PendentPeriodicNegative):
        if kappa > 0:
            theta_rate = kappa * zc
        else:
            theta_rate = -kappa * math.sqrt(zc * zc + 4.0 / kappa)
        s_try = 1.05 * 2.0 * math.pi / theta_rate
        opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=abs_tol,
                                 events=(("AngleHit", 2.0 * math.pi),))
        prof = integrate(zc, kappa, s_try, opts)
        hits = prof.events_of("AngleHit")
        if not hits:
            raise NotPeriodic("no full turn located within the winding bound")
        T = hits[0].s
        winding = 1
    else:
        s0, _ = _first_zero(zc, kappa, rel_tol, abs_tol)
        T = 4.0 * s0
        winding = 0

    opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=abs_tol)
    prof = integrate(zc, kappa, 2.02 * T, opts)
    xT, zT, _ = prof.eval(T)
    translation = float(xT[0])
    s_grid = np.linspace(0.0, T, 256)
    x0, zz0, _ = prof.eval(s_grid)
    x1, zz1, _ = prof.eval(s_grid + T)
    residual = float(max(np.max(np.abs(x1 - x0 - translation)),
                         np.max(np.abs(zz1 - zz0))))
    return PeriodData(float(T), translation, winding, residual)


def vertical_points(z0: float, kappa: float, rel_tol: float = 1e-10,
                    abs_tol: float = 1e-12):
    """Vertical tangent points over one period of an oscillating pendent
    directrix: exactly four, at heights +-sqrt(z0^2 + 2/kappa), each strictly
    between a height extremum and a z-zero.

    On the graph boundary the vertical points degenerate onto the z-zeros
    (height 0) and two records per period are returned.
    """
    regime = classify(z0, kappa)
    zc = _canonical_z0(z0, kappa)
    on_boundary = "OnGraphBoundary" in regime.boundary_flags
    if regime.tag is not RegimeTag.PendentOscillatingVertical and not on_boundary:
        raise WrongRegime(f"{regime.tag.value} has no vertical-point band")

    s0, _ = _first_zero(zc, kappa, rel_tol, abs_tol)
    T = 4.0 * s0
    quarter = T / 4.0
    opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=abs_tol,
                             events=("ZZero",))
    prof = integrate(zc, kappa, 1.002 * T, opts)
    if on_boundary:
        recs = [VerticalPointRecord(e.s, e.state.z,
                                    min(int(e.s / quarter), 3))
                for e in prof.events_of("ZZero") if e.s <= T * (1 + 1e-9)]
        return recs
    # theta is strictly monotone on each quarter arc, so the four vertical
    # points are bisected through +-pi/2 directly; grid scanning can miss
    # them when the band is entered close to the graph boundary.
    half_pi = math.pi / 2
    locations = [
        _theta_bisect(prof, half_pi, 0.0, s0),
        _theta_bisect(prof, half_pi, s0, 2.0 * s0),
        _theta_bisect(prof, -half_pi, 2.0 * s0, 3.0 * s0),
        _theta_bisect(prof, -half_pi, 3.0 * s0, 4.0 * s0),
    ]
    recs = []
    for s_v in locations:
        _, zv, _ = prof.eval(s_v)
        recs.append(VerticalPointRecord(float(s_v), float(zv[0]),
                                        min(int(s_v / quarter), 3)))
    return recs


# ---------------------------------------------------------------------------
# Critical start heights of the oscillating pendent band

def _quarter_geometry(z0, kappa, rel_tol=1e-10):
    """(x at first z-zero, x at first vertical point) for the oscillating band."""
    s0, prof = _first_zero(z0, kappa, rel_tol, 1e-13)
    x_zero = prof.events_of("ZZero")[0].state.x
    s_vert = _theta_bisect(prof, math.pi / 2, 0.0, s0)
    xv, _, _ = prof.eval(s_vert)
    return float(x_zero), float(xv[0])


def critical_heights(kappa: float, rel_tol: float = 1e-10) -> CriticalHeights:
    """Locate the tangential-contact and closed-curve start heights.

    Both are bisected inside the oscillating band (endpoints shrunk inward by
    1e-6 relative, where the defining functions degenerate).  z_closed is the
    root of the first zero's abscissa x(s0); z_tangent is the root of
    2 x(s0) - x(s*) with s* the first vertical point, i.e. the start height
    at which the upper arc's vertical point lands on the z-axis and the
    directrix touches itself tangentially there.  Monotonicity of both
    functions in z0 is asserted on every evaluation made.
    """
    if not kappa < 0:
        raise InvalidParams("critical heights exist for kappa < 0 only")
    t_wind, t_graph = _thresholds(kappa)
    lo = t_wind * (1.0 - 1e-6)
    hi = t_graph * (1.0 + 1e-6)
    width_goal = 1e-10 * (2.0 / math.sqrt(-kappa))

    cache = {}

    def geometry(z0):
        if z0 not in cache:
            cache[z0] = _quarter_geometry(z0, kappa, rel_tol)
        return cache[z0]

    def f_closed(z0):
        return geometry(z0)[0]

    def f_tangent(z0):
        xz, xv = geometry(z0)
        return 2.0 * xz - xv

    roots = []
    widths = []
    for f, name in ((f_tangent, "tangential contact"),
                    (f_closed, "closed curve")):
        a, b = lo, hi
        fa, fb = f(a), f(b)
        if not (fa < 0 < fb):
            raise NoSignChange(
                f"{name}: endpoints do not straddle zero "
                f"(f({a:.6g}) = {fa:.6g}, f({b:.6g}) = {fb:.6g})")
        while b - a > width_goal:
            mid = 0.5 * (a + b)
            fm = f(mid)
            if fm < 0:
                a, fa = mid, fm
            else:
                b, fb = mid, fm
        roots.append(0.5 * (a + b))
        widths.append(b - a)

    for f, name in ((f_closed, "closed curve"),
                    (f_tangent, "tangential contact")):
        zs = sorted(cache)
        vals = [f(z) for z in zs]
        if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
            raise MonotonicityViolation(
                f"{name} defining function not strictly increasing in z0 "
                "on the evaluation grid")

    return CriticalHeights(z_tangent=roots[0], z_closed=roots[1],
                           bracket_width=max(widths))


# ---------------------------------------------------------------------------
# Self-intersection sweep

def directrix_double_points(z0: float, kappa: float,
                            samples_per_period: int = 10_000,
                            angle_tol: float = 1e-4) -> DoublePointScan:
    """Segment-segment sweep over one period's polyline.

    Intersections between nonadjacent segments are reported with their
    crossing angle; contact is declared tangential when an intersection
    exists with crossing angle below ``angle_tol`` radians.
    """
    regime = classify(z0, kappa)
    if regime.tag not in (RegimeTag.PendentOscillatingVertical,
                          RegimeTag.PendentGraph,
                          RegimeTag.SessilePeriodic,
                          RegimeTag.PendentPeriodicNegative):
        raise WrongRegime(f"{regime.tag.value} has no period to scan")
    pd = period(z0, kappa)
    zc = _canonical_z0(z0, kappa)
    prof = integrate(zc, kappa, pd.T, IntegratorOptions())
    s = np.linspace(0.0, pd.T, samples_per_period)
    x, z, _ = prof.eval(s)
    pts = np.column_stack([x, z])
    crossings = _polyline_self_intersections(pts, s)
    tangential = any(c[4] < angle_tol for c in crossings)
    return DoublePointScan(bool(crossings), tangential, tuple(crossings),
                           pd.translation)


def _polyline_self_intersections(pts, s):
    """All transversal/touching intersections between nonadjacent segments.

    Broadphase bins segment bounding boxes on a uniform grid; narrowphase
    solves the 2x2 segment-segment system.
    """
    p0 = pts[:-1]
    p1 = pts[1:]
    nseg = p0.shape[0]
    lo = np.minimum(p0, p1)
    hi = np.maximum(p0, p1)
    span = np.max(hi, axis=0) - np.min(lo, axis=0)
    cell = max(np.max(hi - lo), np.max(span) / 512, 1e-300)
    origin = np.min(lo, axis=0)
    i0 = np.floor((lo - origin) / cell).astype(np.int64)
    i1 = np.floor((hi - origin) / cell).astype(np.int64)

    bins = {}
    for k in range(nseg):
        for cx in range(i0[k, 0], i1[k, 0] + 1):
            for cy in range(i0[k, 1], i1[k, 1] + 1):
                bins.setdefault((cx, cy), []).append(k)

    pairs = set()
    for members in bins.values():
        if len(members) < 2:
            continue
        for a_idx in range(len(members)):
            for b_idx in range(a_idx + 1, len(members)):
                i, j = members[a_idx], members[b_idx]
                if abs(i - j) <= 1:
                    continue
                pairs.add((min(i, j), max(i, j)))

    crossings = []
    for i, j in sorted(pairs):
        hit = _segment_intersection(p0[i], p1[i], p0[j], p1[j])
        if hit is None:
            continue
        t, u, px, py = hit
        d1 = p1[i] - p0[i]
        d2 = p1[j] - p0[j]
        cosang = np.dot(d1, d2) / (np.linalg.norm(d1) * np.linalg.norm(d2))
        angle = math.acos(min(1.0, abs(float(cosang))))
        si = s[i] + t * (s[i + 1] - s[i])
        sj = s[j] + u * (s[j + 1] - s[j])
        crossings.append((float(si), float(sj), float(px), float(py),
                          float(angle)))
    return crossings


def _segment_intersection(a0, a1, b0, b1):
    d1 = a1 - a0
    d2 = b1 - b0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    rhs = b0 - a0
    if denom == 0.0:
        return None
    t = (rhs[0] * d2[1] - rhs[1] * d2[0]) / denom
    u = (rhs[0] * d1[1] - rhs[1] * d1[0]) / denom
    eps = 1e-12
    if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
        p = a0 + t * d1
        return float(t), float(u), float(p[0]), float(p[1])
    return None
