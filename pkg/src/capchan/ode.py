"""Profile ODE for capillary channels: arclength system, events, symmetries.

A cylindrical capillary surface is generated by a planar directrix
``alpha(s) = (x(s), z(s))`` traversed at unit speed, with tangent angle
``theta`` driven by the height:

    x' = cos(theta),  z' = sin(theta),  theta' = kappa * z,

starting from ``x = 0, theta = 0, z = z0``.  Along any trajectory the
combination ``z^2 - z0^2 - (2/kappa) * (1 - cos(theta))`` vanishes
identically, which bounds ``z`` and makes the system globally integrable.

``theta`` is stored unwrapped: in winding regimes it grows without bound and
the winding count is meaningful classification data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rk
from .errors import InvalidParams, NoEvent, ToleranceNotMet, UnreachableAngle

__all__ = [
    "FluidParams",
    "IntegratorOptions",
    "IntegratorStats",
    "ProfileState",
    "Event",
    "Profile",
    "SymmetryReport",
    "integrate",
    "height_squared_from_theta",
    "symmetry_residuals",
]

EVENT_KINDS = ("ThetaCrossing", "ZZero", "VerticalPoint", "HeightExtremum",
               "AngleHit")


@dataclass(frozen=True)
class FluidParams:
    """Physical inputs: capillarity constant, plate half-width, contact angle.

    kappa is signed (positive: liquid rises, negative: liquid hangs);
    half_width_a and gamma apply to plate problems only and may be omitted.
    """

    kappa: float
    half_width_a: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kappa == 0 or not math.isfinite(self.kappa):
            raise InvalidParams("kappa must be finite and nonzero")
        if self.half_width_a is not None and not self.half_width_a > 0:
            raise InvalidParams("half_width_a must be positive")
        if self.gamma is not None and not (0 <= self.gamma <= math.pi):
            raise InvalidParams("gamma must lie in [0, pi]")


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    n_samples: int = 1000
    events: tuple = ()
    event_tol: float = 1e-12
    max_steps: int = 1_000_000
    method: str = "rkf78"


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rhs_evals: int
    rel_tol: float
    abs_tol: float
    method: str


@dataclass(frozen=True)
class ProfileState:
    """One directrix point in arclength parametrization."""

    s: float
    x: float
    z: float
    theta: float


@dataclass(frozen=True)
class Event:
    """A located trajectory event.

    kind is one of EVENT_KINDS; target carries the parameter for
    ThetaCrossing (the crossed multiple of pi/2) and AngleHit (the
    requested inclination), and is None otherwise.
    """

    kind: str
    s: float
    state: ProfileState
    target: float | None = None


@dataclass(frozen=True)
class SymmetryReport:
    """Residuals of the reflection and point symmetries of the directrix.

    reflection: one (s0, dx, dz) triple per height extremum, where dx is the
    worst mirror defect of x about the vertical line through s0 and dz the
    worst height mismatch.  point: one (s0, dx, dz) triple per zero of z for
    the central symmetry about alpha(s0).
    """

    reflection: tuple
    point: tuple
    max_residual: float


class Profile:
    """Dense sampled trajectory with located events.

    Values are immutable after construction and safe to share across
    threads; ``eval`` interpolates at accepted-step accuracy anywhere in
    [0, s_max].
    """

    def __init__(self, params, z0, s, x, z, theta, events, stats,
                 nodes_s=None, nodes_y=None):
        self.params = params
        self.z0 = float(z0)
        self.s = _readonly(s)
        self.x = _readonly(x)
        self.z = _readonly(z)
        self.theta = _readonly(theta)
        self.events = tuple(events)
        self.integrator_stats = stats
        self._nodes_s = nodes_s
        self._nodes_y = nodes_y

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    @property
    def samples(self):
        return tuple(ProfileState(float(si), float(xi), float(zi), float(ti))
                     for si, xi, zi, ti in zip(self.s, self.x, self.z,
                                               self.theta))

    def eval(self, s):
        """States at arclengths ``s``; returns (x, z, theta) arrays."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if s_arr.size and (s_arr.min() < -1e-12 or
                           s_arr.max() > self.s_max * (1 + 1e-12) + 1e-12):
            raise InvalidParams("evaluation outside the integrated range")
        if self._nodes_s is None:  # flat solution
            zero = np.zeros_like(s_arr)
            return s_arr.copy(), zero, zero.copy()
        out = np.empty((s_arr.size, 3))
        _rk.dense_eval(self._nodes_s, self._nodes_y, self.params.kappa,
                       np.clip(s_arr, 0.0, self.s_max), out)
        return out[:, 0], out[:, 1], out[:, 2]

    def at(self, s: float) -> ProfileState:
        x, z, theta = self.eval(float(s))
        return ProfileState(float(s), float(x[0]), float(z[0]),
                            float(theta[0]))

    def events_of(self, kind: str, target=None):
        sel = [e for e in self.events if e.kind == kind]
        if target is not None:
            sel = [e for e in sel if e.target is not None
                   and abs(e.target - target) <= 1e-9 * max(1.0, abs(target))]
        return sel


def _readonly(a):
    arr = np.asarray(a, dtype=float)
    arr.setflags(write=False)
    return arr


def height_squared_from_theta(theta: float, z0: float, kappa: float) -> float:
    """Squared height at inclination ``theta`` on the trajectory from z0.

    Raises UnreachableAngle when the value would be negative, i.e. no
    trajectory point with that inclination exists (kappa < 0 only).
    """
    if kappa == 0:
        raise InvalidParams("kappa must be nonzero")
    value = z0 * z0 + (2.0 / kappa) * (1.0 - math.cos(theta))
    if value < 0:
        raise UnreachableAngle(
            f"no point with inclination {theta} on this trajectory "
            f"(squared height {value} < 0)")
    return value


def _flat_profile(kappa, s_max, opts):
    s = np.linspace(0.0, s_max, opts.n_samples)
    zero = np.zeros_like(s)
    stats = IntegratorStats(0, 0, opts.rel_tol, opts.abs_tol, "exact-flat")
    return Profile(FluidParams(kappa), 0.0, s, s.copy(), zero, zero.copy(),
                   (), stats)


def integrate(z0: float, kappa: float, s_max: float,
              opts: IntegratorOptions | None = None) -> Profile:
    """Integrate the profile system over [0, s_max] from height z0.

    The degenerate start z0 = 0 returns the exact flat solution
    (x, z, theta) = (s, 0, 0) without numerical integration.
    """
    opts = opts or IntegratorOptions()
    if kappa == 0 or not math.isfinite(kappa):
        raise InvalidParams("kappa must be finite and nonzero")
    if not (s_max > 0) or not math.isfinite(s_max):
        raise InvalidParams("s_max must be positive and finite")
    if z0 == 0.0:
        return _flat_profile(kappa, s_max, opts)

    nodes_s, nodes_y, status, nfev = _rk.integrate_nodes(
        float(z0), float(kappa), float(s_max), opts.rel_tol, opts.abs_tol,
        opts.max_steps)
    if status != _rk.STATUS_OK:
        raise ToleranceNotMet(
            f"step controller exhausted its budget at s = {nodes_s[-1]:.6g} "
            f"of {s_max:.6g}")

    s_samples = np.linspace(0.0, s_max, opts.n_samples)
    out = np.empty((s_samples.size, 3))
    _rk.dense_eval(nodes_s, nodes_y, kappa, s_samples, out)

    params = FluidParams(kappa)
    stats = IntegratorStats(nodes_s.size - 1, nfev, opts.rel_tol,
                            opts.abs_tol, opts.method)
    profile = Profile(params, z0, s_samples, out[:, 0], out[:, 1], out[:, 2],
                      (), stats, nodes_s, nodes_y)
    if opts.events:
        events = _locate_events(profile, opts.events, opts.event_tol)
        profile.events = tuple(events)
    return profile


# ---------------------------------------------------------------------------
# Event localization: bracket sign changes on a refinement of the accepted
# steps, then bisect the event function on dense output.

def _scan_grid(profile):
    s_nodes = profile._nodes_s
    y_nodes = profile._nodes_y
    dth = np.abs(np.diff(y_nodes[:, 2]))
    zscale = max(np.max(np.abs(y_nodes[:, 1])), 1e-12)
    dz = np.abs(np.diff(y_nodes[:, 1])) / zscale
    m = np.maximum(2, np.ceil(np.maximum(dth, dz) / 0.2).astype(np.int64))
    np.minimum(m, 64, out=m)
    total = int(m.sum())
    starts = np.repeat(s_nodes[:-1], m)
    widths = np.repeat(np.diff(s_nodes), m)
    offsets = np.concatenate(([0], np.cumsum(m)[:-1]))
    j = np.arange(total) - np.repeat(offsets, m)
    grid = starts + widths * (j / np.repeat(m, m))
    grid = np.append(grid, s_nodes[-1])
    out = np.empty((grid.size, 3))
    _rk.dense_eval(s_nodes, y_nodes, profile.params.kappa, grid, out)
    return grid, out


def _normalize_event_specs(specs):
    normal = []
    for spec in specs:
        if isinstance(spec, str):
            kind, target = spec, None
        else:
            kind, target = spec[0], float(spec[1])
        if kind not in EVENT_KINDS:
            raise InvalidParams(f"unknown event kind {kind!r}")
        if kind == "AngleHit" and target is None:
            raise InvalidParams("AngleHit requires a target inclination")
        normal.append((kind, target))
    return normal


def _event_functions(kind, target, grid_states):
    """Yield (callable g(x,z,theta), target) pairs for one event spec."""
    theta = grid_states[:, 2]
    if kind == "ZZero":
        yield (lambda x, z, th: z), None
    elif kind == "VerticalPoint":
        yield (lambda x, z, th: np.cos(th)), None
    elif kind == "HeightExtremum":
        yield (lambda x, z, th: np.sin(th)), None
    elif kind == "AngleHit":
        yield (lambda x, z, th, t=target: th - t), target
    elif kind == "ThetaCrossing":
        half_pi = math.pi / 2
        kmin = int(math.ceil(theta.min() / half_pi - 1e-12))
        kmax = int(math.floor(theta.max() / half_pi + 1e-12))
        for k in range(kmin, kmax + 1):
            tgt = k * half_pi
            yield (lambda x, z, th, t=tgt: th - t), tgt


def _bisect_event(profile, lo, hi, gfun, event_tol):
    x, z, th = profile.eval(np.array([lo, hi]))
    glo = gfun(x[0], z[0], th[0])
    ghi = gfun(x[1], z[1], th[1])
    s_scale = max(1.0, profile.s_max)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        xm, zm, tm = profile.eval(mid)
        gm = gfun(xm[0], zm[0], tm[0])
        if abs(gm) <= event_tol or (hi - lo) <= 1e-15 * s_scale:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    return 0.5 * (lo + hi)


def _locate_events(profile, specs, event_tol):
    grid, states = _scan_grid(profile)
    events = []
    for kind, target in _normalize_event_specs(specs):
        for gfun, tgt in _event_functions(kind, target, states):
            g = gfun(states[:, 0], states[:, 1], states[:, 2])
            sign_change = (g[:-1] * g[1:]) < 0
            hits = np.flatnonzero(sign_change)
            exact = np.flatnonzero(g == 0.0)
            s_list = [_bisect_event(profile, grid[i], grid[i + 1], gfun,
                                    event_tol) for i in hits]
            s_list += [grid[i] for i in exact if i > 0]
            for s_ev in sorted(s_list):
                xe, ze, te = profile.eval(s_ev)
                state = ProfileState(float(s_ev), float(xe[0]), float(ze[0]),
                                     float(te[0]))
                events.append(Event(kind, float(s_ev), state, tgt))
    events.sort(key=lambda e: (e.s, e.kind, -1.0 if e.target is None
                               else e.target))
    return _dedup_events(events, profile.s_max)


def _dedup_events(events, s_max):
    kept = []
    for ev in events:
        if kept and kept[-1].kind == ev.kind and kept[-1].target == ev.target \
                and abs(kept[-1].s - ev.s) <= 1e-11 * max(1.0, s_max):
            continue
        kept.append(ev)
    return kept


def first_crossing(profile, gfun, event_tol=1e-12):
    """Arclength of the first sign change of g(x, z, theta), or None.

    Internal helper shared by the shooting and classification layers; g is
    evaluated on the refinement grid and polished by bisection.
    """
    grid, states = _scan_grid(profile)
    g = gfun(states[:, 0], states[:, 1], states[:, 2])
    if g[0] == 0.0:
        nz = np.flatnonzero(np.abs(g) > 0)
        start = nz[0] if nz.size else g.size
    else:
        start = 0
    gs = g[start:]
    sign_change = np.flatnonzero((gs[:-1] * gs[1:]) < 0)
    exact = np.flatnonzero(gs == 0.0)
    candidates = []
    if sign_change.size:
        i = start + sign_change[0]
        candidates.append(_bisect_event(profile, grid[i], grid[i + 1], gfun,
                                        event_tol))
    if exact.size:
        candidates.append(grid[start + exact[0]])
    return min(candidates) if candidates else None


# ---------------------------------------------------------------------------
# Symmetries

def symmetry_residuals(profile: Profile, n_offsets: int = 200) -> SymmetryReport:
    """Check the mirror and central symmetries on an integrated profile.

    Every height extremum is a mirror axis and every zero of z a center of
    symmetry; on a well-resolved trajectory the residuals are at the level of
    the integration tolerance.
    """
    if profile.z0 == 0.0:
        # the line is fully symmetric about every point
        mid = profile.s_max / 2
        return SymmetryReport(((mid, 0.0, 0.0),), ((mid, 0.0, 0.0),), 0.0)

    s_max = profile.s_max
    reflection = []
    point = []
    worst = 0.0
    for ev in profile.events:
        if ev.kind not in ("HeightExtremum", "ZZero"):
            continue
        margin = min(ev.s, s_max - ev.s)
        if margin <= 0:
            continue
        offs = np.linspace(0.0, margin, n_offsets + 1)[1:]
        xp, zp, _ = profile.eval(ev.s + offs)
        xm, zm, _ = profile.eval(ev.s - offs)
        dx = float(np.max(np.abs(xp + xm - 2 * ev.state.x)))
        if ev.kind == "HeightExtremum":
            dz = float(np.max(np.abs(zp - zm)))
            reflection.append((ev.s, dx, dz))
        else:
            dz = float(np.max(np.abs(zp + zm - 2 * ev.state.z)))
            point.append((ev.s, dx, dz))
        worst = max(worst, dx, dz)
    if not reflection and not point:
        raise NoEvent("no height extremum or z-zero with positive margin; "
                      "integrate with those event kinds requested")
    return SymmetryReport(tuple(reflection), tuple(point), worst)
