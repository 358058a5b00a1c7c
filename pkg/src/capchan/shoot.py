"""Boundary-value problems for capillary channels, solved by shooting.

Two problems are covered for kappa > 0: prescribing the contact angle gamma
on vertical plates at x = +-a, and prescribing the cross-sectional volume of
a channel resting on the reference plane.  Both reduce to root-finding on
the center height u0 and are solved by plain bisection, which is
unconditionally convergent and deterministic.

On the rising graph arc the first integral gives the height in closed form,

    u(psi) = sqrt(u0^2 + (2/kappa) * (1 - cos(psi))),

and the abscissa as a plain quadrature r(psi) = int_0^psi cos(phi) /
(kappa u(phi)) dphi.  These closed-form evaluators drive the bisection inner
loop; every returned root is then re-verified against an arclength
integration of the full system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import RegimeTag, classify
from .errors import (BracketOverflow, InvalidParams, NoRoot, ToleranceNotMet,
                     WrongRegime)
from .ode import IntegratorOptions, first_crossing, integrate

__all__ = [
    "ShootResult",
    "ChannelGeometry",
    "u_at_angle",
    "r_at_angle",
    "volume_closed_form",
    "shoot_contact_angle",
    "shoot_volume",
    "volume_at_angle",
    "channel_extent",
    "pendent_first_zero",
]


@dataclass(frozen=True)
class ShootResult:
    u0: float
    residual: float
    iterations: int
    bracket: tuple

    def to_json_dict(self):
        return {"u0": self.u0, "residual": self.residual,
                "iterations": self.iterations,
                "bracket": [self.bracket[0], self.bracket[1]]}


@dataclass(frozen=True)
class ChannelGeometry:
    """Extents and volume of a resting channel: abscissa and height at the
    contact inclination, maximal half-width (vertical point), limiting
    half-width as the inclination approaches pi, and cross-sectional area
    per unit channel length."""

    r_gamma: float
    u_gamma: float
    R_vertical: float
    r_o: float
    volume: float

    def to_json_dict(self):
        return {"r_gamma": self.r_gamma, "u_gamma": self.u_gamma,
                "R_vertical": self.R_vertical, "r_o": self.r_o,
                "volume": self.volume}


# ---------------------------------------------------------------------------
# Closed-form evaluators on the inclination variable

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def u_at_angle(u0: float, kappa: float, psi) -> float | np.ndarray:
    """Height at inclination psi via the first integral."""
    if kappa == 0:
        raise InvalidParams("kappa must be nonzero")
    val = u0 * u0 + (2.0 / kappa) * (1.0 - np.cos(psi))
    return np.sqrt(val)


def _quad_panels(u0, kappa, psi):
    """Panel boundaries resolving the integrand peak near phi = 0."""
    w = abs(u0) * math.sqrt(kappa)
    if w >= psi / 4:
        return [0.0, 0.5 * psi, psi]
    bounds = [0.0, w]
    while bounds[-1] * 4.0 < psi:
        bounds.append(bounds[-1] * 4.0)
    bounds.append(psi)
    return bounds


def r_at_angle(u0: float, kappa: float, psi: float) -> float:
    """Abscissa at inclination psi on the rising graph arc (kappa > 0).

    Gauss-Legendre quadrature of cos(phi) / (kappa * u(phi)) on panels
    geometrically refined toward phi = 0, where the integrand peaks for
    small center heights.
    """
    if not (kappa > 0 and u0 > 0):
        raise InvalidParams("r_at_angle requires kappa > 0 and u0 > 0")
    if psi == 0.0:
        return 0.0
    if not (0 < psi <= math.pi):
        raise InvalidParams("psi must lie in (0, pi]")
    total = 0.0
    bounds = _quad_panels(u0, kappa, psi)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        phi = mid + half * _GL_NODES
        total += half * np.sum(_GL_WEIGHTS * np.cos(phi)
                               / (kappa * u_at_angle(u0, kappa, phi)))
    return float(total)


def volume_closed_form(u0: float, kappa: float, psi: float) -> float:
    """Cross-sectional volume 2 (r u - sin(psi)/kappa) at inclination psi."""
    r = r_at_angle(u0, kappa, psi)
    u = float(u_at_angle(u0, kappa, psi))
    return 2.0 * (r * u - math.sin(psi) / kappa)


# ---------------------------------------------------------------------------
# Contact-angle problem on plates at x = +-a

def _wall_residual(u0, kappa, a, gamma, rel_tol=1e-12):
    """sin(theta) - cos(gamma) at the wall, from an arclength integration.

    Returns (residual, reached) where reached is False when the trajectory
    turns vertical before spanning the half-width.
    """
    psi_cap = math.pi / 2 - gamma
    s_max = 1.05 * (math.pi / 2) / (kappa * u0)
    prof = integrate(u0, kappa, s_max,
                     IntegratorOptions(rel_tol=rel_tol, abs_tol=1e-14,
                                       n_samples=64))
    s_a = first_crossing(prof, lambda x, z, th: x - a)
    if s_a is None:
        return 1.0 - math.cos(gamma), False
    _, _, th = prof.eval(s_a)
    theta_a = float(th[0])
    if theta_a > math.pi / 2:  # crossed past the vertical point
        return 1.0 - math.cos(gamma), False
    del psi_cap
    return math.sin(theta_a) - math.cos(gamma), True


def shoot_contact_angle(kappa: float, a: float, gamma: float,
                        tol: float = 1e-9) -> ShootResult:
    """Center height u0 for which the profile meets the plates at x = +-a
    with contact angle gamma (prescribed slope at the wall).

    The root lies in (0, 1/(kappa a)); bisection runs on the closed-form
    wall inclination and the result is re-verified against an independent
    arclength integration.
    """
    if not (kappa > 0):
        raise InvalidParams("contact-angle shooting requires kappa > 0")
    if not (a > 0):
        raise InvalidParams("half-width a must be positive")
    if not (0 <= gamma < math.pi / 2):
        raise InvalidParams("gamma must lie in [0, pi/2); steeper angles "
                            "reduce to this range by the z -> -z symmetry")
    psi_t = math.pi / 2 - gamma
    cap = 1.0 / (kappa * a)
    eps = 1e-12 * cap
    lo, hi = eps, cap - eps

    def q(u0):
        # positive when the wall inclination is still short of the target
        return r_at_angle(u0, kappa, psi_t) - a

    q_lo, q_hi = q(lo), q(hi)
    if not (q_lo > 0 > q_hi):
        raise NoRoot(f"no sign change on ({lo:.3e}, {hi:.3e}): "
                     f"q(lo) = {q_lo:.3e}, q(hi) = {q_hi:.3e}")
    iterations = 0
    while hi - lo > 1e-14 * cap:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if q(mid) > 0:
            lo = mid
        else:
            hi = mid
    u0 = lo  # the side from which the wall is reached on the graph arc
    residual, reached = _wall_residual(u0, kappa, a, gamma)
    if not reached or abs(residual) > tol:
        raise ToleranceNotMet(
            f"wall residual {residual:.3e} exceeds {tol:.1e} at u0 = {u0!r}")
    return ShootResult(u0, abs(residual), iterations, (lo, hi))


# ---------------------------------------------------------------------------
# Prescribed-volume problem for channels resting on the reference plane

def volume_at_angle(u0: float, kappa: float, gamma: float,
                    rel_tol: float = 1e-10) -> float:
    """Cross-sectional volume at contact inclination gamma, evaluated at the
    located inclination event of an arclength integration."""
    if not (kappa > 0 and u0 > 0):
        raise InvalidParams("volume_at_angle requires kappa > 0 and u0 > 0")
    if not (0 < gamma <= math.pi):
        raise InvalidParams("gamma must lie in (0, pi]")
    prof = _channel_profile(u0, kappa, (gamma,), rel_tol)
    ev = prof.events_of("AngleHit", gamma)[0]
    return 2.0 * (ev.state.x * ev.state.z - math.sin(gamma) / kappa)


def _channel_profile(u0, kappa, angle_targets, rel_tol=1e-10):
    targets = sorted(set(float(t) for t in angle_targets))
    s_max = 1.02 * targets[-1] / (kappa * u0) + 1e-12
    opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=1e-13, n_samples=256,
                             events=tuple(("AngleHit", t) for t in targets))
    prof = integrate(u0, kappa, s_max, opts)
    for t in targets:
        if not prof.events_of("AngleHit", t):
            raise ToleranceNotMet(f"inclination {t} not reached by "
                                  f"s = {s_max:.3g}")
    return prof


def shoot_volume(kappa: float, gamma: float, V: float,
                 tol: float = 1e-9) -> ShootResult:
    """Center height u0 of the resting channel with contact angle gamma and
    prescribed cross-sectional volume V.

    The volume is strictly decreasing in u0, so the bracket is grown by
    halving/doubling until it straddles V and then bisected.
    """
    if not (kappa > 0):
        raise InvalidParams("volume shooting requires kappa > 0")
    if not (0 < gamma <= math.pi):
        raise InvalidParams("gamma must lie in (0, pi]")
    if not (V > 0):
        raise InvalidParams("volume must be positive")

    def vol(u0):
        return volume_closed_form(u0, kappa, gamma)

    lo = hi = 1.0 / math.sqrt(kappa)
    expansions = 0
    while vol(lo) < V:
        lo *= 0.5
        expansions += 1
        if expansions > 1000:
            raise BracketOverflow("volume bracket: lo halved 1000 times")
    while vol(hi) > V:
        hi *= 2.0
        expansions += 1
        if expansions > 1000:
            raise BracketOverflow("volume bracket: hi doubled 1000 times")
    iterations = 0
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        iterations += 1
        if vol(mid) > V:
            lo = mid
        else:
            hi = mid
    u0 = 0.5 * (lo + hi)
    residual = abs(volume_at_angle(u0, kappa, gamma) - V)
    if residual > tol * max(1.0, V):
        raise ToleranceNotMet(
            f"volume residual {residual:.3e} exceeds {tol:.1e} at u0 = {u0!r}")
    return ShootResult(u0, residual, iterations, (lo, hi))


def channel_extent(u0: float, kappa: float, gamma: float,
                   rel_tol: float = 1e-10) -> ChannelGeometry:
    """Geometry of the resting channel: r and u at the contact inclination,
    the maximal half-width at the vertical point, the limiting half-width as
    the inclination approaches pi (Richardson-extrapolated), and the volume.
    """
    if not (kappa > 0 and u0 > 0):
        raise InvalidParams("channel_extent requires kappa > 0 and u0 > 0")
    if not (0 < gamma <= math.pi):
        raise InvalidParams("gamma must lie in (0, pi]")
    deltas = (1e-3, 1e-4, 1e-5)
    targets = {gamma, math.pi / 2} | {math.pi - d for d in deltas}
    prof = _channel_profile(u0, kappa, targets, rel_tol)

    def r_at(t):
        return prof.events_of("AngleHit", t)[0].state.x

    def u_at(t):
        return prof.events_of("AngleHit", t)[0].state.z

    r_gamma = r_at(gamma)
    u_gamma = u_at(gamma)
    u_closed = float(u_at_angle(u0, kappa, gamma))
    if abs(u_gamma - u_closed) > 1e-8 * max(1.0, abs(u_closed)):
        raise ToleranceNotMet(
            f"height at inclination {gamma} disagrees with the first "
            f"integral: {u_gamma!r} vs {u_closed!r}")
    R_vertical = r_at(math.pi / 2)
    r1, r2, r3 = (r_at(math.pi - d) for d in deltas)
    # r(pi - d) = r_o + c1 d + O(d^2); eliminate the linear and quadratic terms
    e1 = (10.0 * r2 - r1) / 9.0
    e2 = (10.0 * r3 - r2) / 9.0
    r_o = (100.0 * e2 - e1) / 99.0
    volume = 2.0 * (r_gamma * u_gamma - math.sin(gamma) / kappa)
    return ChannelGeometry(r_gamma, u_gamma, R_vertical, r_o, volume)


# ---------------------------------------------------------------------------
# Pendent graph: first touch of the reference plane

def pendent_first_zero(u0: float, kappa: float,
                       rel_tol: float = 1e-10) -> float:
    """Abscissa of the first zero of the height for a hanging graph profile
    (kappa < 0, -sqrt(2/(-kappa)) <= u0 < 0)."""
    if not (kappa < 0 and u0 < 0):
        raise WrongRegime("pendent_first_zero requires kappa < 0 and u0 < 0")
    regime = classify(u0, kappa)
    if regime.tag is not RegimeTag.PendentGraph:
        raise WrongRegime(f"regime {regime.tag.value} is not a hanging graph")
    s_try = 8.0 / math.sqrt(-kappa) * (1.0 + abs(u0) * math.sqrt(-kappa))
    for _ in range(14):
        opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=1e-13,
                                 events=("ZZero",))
        prof = integrate(u0, kappa, s_try, opts)
        zeros = prof.events_of("ZZero")
        if zeros:
            return zeros[0].state.x
        s_try *= 2.0
    raise ToleranceNotMet(f"no zero located up to s = {s_try:.3g}")
