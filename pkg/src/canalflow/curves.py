"""Shock, rarefaction, Lax and critical curves, and the whole-line Riemann solver.

Curves are parametrised by depth ``h`` through an anchor state ``(h0, v0)``.
Forward curves (``R1, S1, R2, S2``) give the states reachable to the right of
the anchor; inverse curves give the states that reach the anchor from the
left.  The "tilde" form of a curve is its discharge ``q = h v``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .state import GRAVITY, State, celerity, eigenvalues

NULL_WAVE_RTOL = 1e-12
_MAX_EXPANSIONS = 200


class DomainViolation(ValueError):
    """A curve was evaluated on the wrong side of its anchor depth."""


class VacuumError(ValueError):
    """The Riemann problem generates a dry middle state."""


class CurveId(enum.Enum):
    R1 = "R1"
    S1 = "S1"
    R2 = "R2"
    S2 = "S2"
    R1inv = "R1inv"
    S1inv = "S1inv"
    R2inv = "R2inv"
    S2inv = "S2inv"
    Cplus = "C+"
    Cminus = "C-"


# +1: defined for h >= h0, -1: defined for h <= h0, 0: any h
_DOMAIN = {
    CurveId.R1: -1,
    CurveId.S1: +1,
    CurveId.R2: +1,
    CurveId.S2: -1,
    CurveId.R1inv: +1,
    CurveId.S1inv: -1,
    CurveId.R2inv: -1,
    CurveId.S2inv: +1,
    CurveId.Cplus: 0,
    CurveId.Cminus: 0,
}


def curve_domain(curve: CurveId) -> int:
    return _DOMAIN[curve]


def _hugoniot(h0: float, h: float, g: float) -> float:
    """Signed jump ``(h - h0) sqrt(g (h + h0) / (2 h h0))``."""
    return (h - h0) * math.sqrt(g * (h + h0) / (2.0 * h * h0))


def curve_v(curve: CurveId, anchor: State, h: float, g: float = GRAVITY) -> float:
    """Velocity on ``curve`` through ``anchor`` at depth ``h``."""
    if not h > 0.0:
        raise DomainViolation(f"depth must be positive, got {h!r}")
    side = _DOMAIN[curve]
    h0, v0 = anchor.h, anchor.v
    if (side > 0 and h < h0) or (side < 0 and h > h0):
        raise DomainViolation(f"{curve.value} through h0={h0!r} is undefined at h={h!r}")
    if curve is CurveId.Cplus:
        return celerity(h, g)
    if curve is CurveId.Cminus:
        return -celerity(h, g)
    if curve in (CurveId.R1, CurveId.R1inv):
        # Riemann invariant v + 2 sqrt(g h) carried through the 1-fan
        return v0 - 2.0 * (celerity(h, g) - celerity(h0, g))
    if curve in (CurveId.R2, CurveId.R2inv):
        return v0 + 2.0 * (celerity(h, g) - celerity(h0, g))
    if curve in (CurveId.S1, CurveId.S2):
        return v0 - _hugoniot(h0, h, g) if curve is CurveId.S1 else v0 + _hugoniot(h0, h, g)
    # S1inv (h < h0) and S2inv (h > h0) sit on the other Hugoniot branch
    return v0 + _hugoniot(h0, h, g) if curve is CurveId.S2inv else v0 - _hugoniot(h0, h, g)


def curve_q(curve: CurveId, anchor: State, h: float, g: float = GRAVITY) -> float:
    return h * curve_v(curve, anchor, h, g)


# ---------------------------------------------------------------------------
# Lax curves


def lax_left_v(u_l: State, h: float, g: float = GRAVITY) -> float:
    """Forward 1-wave curve: ``R1`` below the anchor depth, ``S1`` above."""
    return curve_v(CurveId.R1 if h <= u_l.h else CurveId.S1, u_l, h, g)


def lax_right_v(u_r: State, h: float, g: float = GRAVITY) -> float:
    """Inverse 2-wave curve: ``R2inv`` below the anchor depth, ``S2inv`` above."""
    return curve_v(CurveId.R2inv if h <= u_r.h else CurveId.S2inv, u_r, h, g)


def lax_left_q(u_l: State, h: float, g: float = GRAVITY) -> float:
    return h * lax_left_v(u_l, h, g)


def lax_right_q(u_r: State, h: float, g: float = GRAVITY) -> float:
    return h * lax_right_v(u_r, h, g)


def lax_left_dq(u_l: State, h: float, g: float = GRAVITY) -> float:
    """Derivative of ``h -> lax_left_q(u_l, h)``."""
    hl, vl = u_l.h, u_l.v
    if h <= hl:
        return vl + 2.0 * celerity(hl, g) - 3.0 * celerity(h, g)
    root = math.sqrt(h * (h + hl))
    return vl - math.sqrt(g / (2.0 * hl)) * (4.0 * h * h + hl * h - hl * hl) / (2.0 * root)


def lax_right_dq(u_r: State, h: float, g: float = GRAVITY) -> float:
    """Derivative of ``h -> lax_right_q(u_r, h)``."""
    hr, vr = u_r.h, u_r.v
    if h <= hr:
        return vr - 2.0 * celerity(hr, g) + 3.0 * celerity(h, g)
    root = math.sqrt(h * (h + hr))
    return vr + math.sqrt(g / (2.0 * hr)) * (4.0 * h * h + hr * h - hr * hr) / (2.0 * root)


def conjugate_depth(u: State, g: float = GRAVITY) -> float:
    """Depth on the other side of a zero-speed jump with the same discharge."""
    f2 = (u.v / celerity(u.h, g)) ** 2
    # h (-1 + sqrt(1 + 8 F^2)) / 2 without cancellation at small F
    return u.h * 4.0 * f2 / (1.0 + math.sqrt(1.0 + 8.0 * f2))


# ---------------------------------------------------------------------------
# Root finding


def _find_root(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of ``f`` in ``[lo, hi]`` with ``hi`` grown geometrically until ``f`` changes sign."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    n = 0
    while flo * fhi > 0.0:
        n += 1
        if n > _MAX_EXPANSIONS:
            raise RuntimeError("failed to bracket root")
        lo, flo = hi, fhi
        hi *= 2.0
        fhi = f(hi)
    if fhi == 0.0:
        return hi
    return brentq(f, lo, hi, xtol=1e-300, maxiter=200)


# ---------------------------------------------------------------------------
# Critical points


@dataclass(frozen=True)
class CriticalPoints:
    """Intersections of a Lax curve with the critical curves.

    ``h_plus_*`` lie on ``C+`` and ``h_minus_*`` on ``C-``; ``_R`` / ``_S``
    mark the rarefaction or shock branch.  ``h_extremum`` is the maximum of
    the left curve (minimum of the right curve) in the ``(h, q)`` plane and
    ``h_star`` the conjugate height of a supercritical anchor moving away
    from the junction side.  Entries that do not exist are ``None``.
    """

    side: str
    h_plus_R: Optional[float] = None
    h_minus_R: Optional[float] = None
    h_plus_S: Optional[float] = None
    h_minus_S: Optional[float] = None
    h_extremum: Optional[float] = None
    h_star: Optional[float] = None

    @property
    def h_max(self) -> Optional[float]:
        return self.h_extremum if self.side == "left" else None

    @property
    def h_min(self) -> Optional[float]:
        return self.h_extremum if self.side == "right" else None


def critical_points_left(u_l: State, g: float = GRAVITY) -> CriticalPoints:
    hl, vl = u_l.h, u_l.v
    cl = celerity(hl, g)
    w = vl + 2.0 * cl  # value of the left Lax curve at h -> 0
    if w <= 0.0:
        return CriticalPoints("left")
    f_l = vl / cl
    h_plus_R = h_minus_R = h_plus_S = h_minus_S = h_star = None
    if f_l <= 1.0:
        h_plus_R = w * w / (9.0 * g)
        h_extremum = h_plus_R
    else:
        h_extremum = _find_root(lambda h: lax_left_dq(u_l, h, g), hl, 2.0 * hl)
    if f_l <= -1.0:
        h_minus_R = w * w / g
    else:
        h_minus_S = _find_root(lambda h: curve_v(CurveId.S1, u_l, h, g) + celerity(h, g), hl, 2.0 * hl)
    if f_l > 1.0:
        h_plus_S = _find_root(lambda h: curve_v(CurveId.S1, u_l, h, g) - celerity(h, g), hl, 2.0 * hl)
        h_star = conjugate_depth(u_l, g)
    return CriticalPoints("left", h_plus_R, h_minus_R, h_plus_S, h_minus_S, h_extremum, h_star)


def critical_points_right(u_r: State, g: float = GRAVITY) -> CriticalPoints:
    """Mirror of :func:`critical_points_left`; ``x -> -x`` swaps ``C+`` and ``C-``."""
    m = critical_points_left(u_r.reflect(), g)
    return CriticalPoints(
        "right",
        h_plus_R=m.h_minus_R,
        h_minus_R=m.h_plus_R,
        h_plus_S=m.h_minus_S,
        h_minus_S=m.h_plus_S,
        h_extremum=m.h_extremum,
        h_star=m.h_star,
    )


def zero_discharge_depth_left(u_l: State, g: float = GRAVITY) -> float:
    """Positive zero of the left Lax curve in the ``(h, q)`` plane (``-2 < F_l <= 0``)."""
    w = u_l.v + 2.0 * celerity(u_l.h, g)
    return w * w / (4.0 * g)


# ---------------------------------------------------------------------------
# Riemann problem


@dataclass(frozen=True)
class Shock:
    speed: float

    @property
    def speeds(self) -> tuple[float, ...]:
        return (self.speed,)


@dataclass(frozen=True)
class Rarefaction:
    head: float
    tail: float
    invariant: float  # v + 2c for the 1-family, v - 2c for the 2-family

    @property
    def speeds(self) -> tuple[float, ...]:
        return (self.head, self.tail)


@dataclass(frozen=True)
class NullWave:
    @property
    def speeds(self) -> tuple[float, ...]:
        return ()


Wave = Union[Shock, Rarefaction, NullWave]


@dataclass(frozen=True)
class WaveFan:
    left: State
    middle: State
    right: State
    wave1: Wave
    wave2: Wave
    g: float = GRAVITY

    @property
    def speeds(self) -> tuple[float, ...]:
        return self.wave1.speeds + self.wave2.speeds

    def max_speed(self) -> float:
        s = self.speeds
        return max(s) if s else -math.inf

    def min_speed(self) -> float:
        s = self.speeds
        return min(s) if s else math.inf


def vacuum_margin(u_l: State, u_r: State, g: float = GRAVITY) -> float:
    """``(v_l + 2 c_l) - (v_r - 2 c_r)``; the middle state is wet iff this is positive."""
    return u_l.v + 2.0 * celerity(u_l.h, g) - (u_r.v - 2.0 * celerity(u_r.h, g))


def middle_depth(u_l: State, u_r: State, g: float = GRAVITY) -> float:
    """Depth where the forward 1-curve of ``u_l`` meets the inverse 2-curve of ``u_r``."""
    margin = vacuum_margin(u_l, u_r, g)
    if not margin > 0.0:
        raise VacuumError(f"no wet middle state between {u_l} and {u_r}")

    def diff(h):
        return lax_left_v(u_l, h, g) - lax_right_v(u_r, h, g)

    h_low = min(u_l.h, u_r.h)
    if diff(h_low) <= 0.0:
        # two rarefactions: both Riemann invariants give the middle depth explicitly
        c = 0.25 * (u_l.v + 2.0 * celerity(u_l.h, g) - u_r.v + 2.0 * celerity(u_r.h, g))
        return c * c / g
    return _find_root(diff, h_low, max(u_l.h, u_r.h))


def solve_riemann(u_l: State, u_r: State, g: float = GRAVITY) -> WaveFan:
    """Exact two-wave solution of the shallow-water Riemann problem."""
    h_m = middle_depth(u_l, u_r, g)
    null1 = abs(h_m - u_l.h) <= NULL_WAVE_RTOL * u_l.h
    null2 = abs(h_m - u_r.h) <= NULL_WAVE_RTOL * u_r.h
    if null1:
        u_m = u_l
    elif null2:
        u_m = u_r
    else:
        u_m = State(h_m, lax_left_q(u_l, h_m, g))

    if null1:
        wave1: Wave = NullWave()
    elif u_m.h < u_l.h:
        wave1 = Rarefaction(eigenvalues(u_l, g)[0], eigenvalues(u_m, g)[0], u_l.v + 2.0 * celerity(u_l.h, g))
    else:
        wave1 = Shock((u_m.q - u_l.q) / (u_m.h - u_l.h))

    if null2:
        wave2: Wave = NullWave()
    elif u_m.h < u_r.h:
        wave2 = Rarefaction(eigenvalues(u_m, g)[1], eigenvalues(u_r, g)[1], u_r.v - 2.0 * celerity(u_r.h, g))
    else:
        wave2 = Shock((u_r.q - u_m.q) / (u_r.h - u_m.h))
    return WaveFan(u_l, u_m, u_r, wave1, wave2, g)


def sample_fan(fan: WaveFan, xi: float) -> State:
    """Self-similar solution at ``xi = x / t``."""
    g = fan.g
    w1, w2 = fan.wave1, fan.wave2
    if isinstance(w1, Shock):
        if xi < w1.speed:
            return fan.left
    elif isinstance(w1, Rarefaction):
        if xi < w1.head:
            return fan.left
        if xi <= w1.tail:
            c = (w1.invariant - xi) / 3.0
            return State(c * c / g, c * c / g * (w1.invariant + 2.0 * xi) / 3.0)
    if isinstance(w2, Shock):
        return fan.middle if xi < w2.speed else fan.right
    if isinstance(w2, Rarefaction):
        if xi < w2.head:
            return fan.middle
        if xi <= w2.tail:
            c = (xi - w2.invariant) / 3.0
            return State(c * c / g, c * c / g * (w2.invariant + 2.0 * xi) / 3.0)
        return fan.right
    return fan.middle


# ---------------------------------------------------------------------------
# Export


def default_depth_grid(anchor: State, n: int = 400, span: float = 20.0) -> np.ndarray:
    return np.geomspace(anchor.h / span, anchor.h * span, n)


def tabulate_curves(anchor: State, h_grid=None, g: float = GRAVITY) -> list[tuple[str, float, float]]:
    """Rows ``(curve_id, h, q)`` for every curve through ``anchor``, in-domain points only."""
    if h_grid is None:
        h_grid = default_depth_grid(anchor)
    h_grid = np.sort(np.asarray(h_grid, dtype=float))
    rows = []
    for curve in CurveId:
        side = _DOMAIN[curve]
        for h in h_grid:
            if (side > 0 and h < anchor.h) or (side < 0 and h > anchor.h):
                continue
            rows.append((curve.value, float(h), curve_q(curve, anchor, float(h), g)))
    return rows
