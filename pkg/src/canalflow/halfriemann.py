"""Admissible traces for half-Riemann problems at a canal end.

``attainable_incoming(u_l, u_hat)`` decides whether the Riemann problem
``(u_l, u_hat)`` is solved by waves of non-positive speed only, so that
``u_hat`` can be imposed at the downstream end of an incoming canal.
``attainable_outgoing(u_r, u_tilde)`` is the upstream-end counterpart with
non-negative speeds.  Membership is decided from the closed-form regions
bounded by Lax curves, critical curves and 2-shock (resp. 1-shock) curves;
the outgoing side is obtained from the incoming one by the reflection
``(h, q) -> (h, -q)``, which maps ``C+`` onto ``C-`` and swaps cases B and C.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .curves import (
    CurveId,
    conjugate_depth,
    critical_points_left,
    curve_q,
    curve_v,
    lax_left_q,
    lax_left_v,
    zero_discharge_depth_left,
)
from .state import CRITICAL_TOL, GRAVITY, State, celerity

MEMBERSHIP_TOL = 1e-9


class Side(enum.Enum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"


class Case(enum.Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class RegionVerdict:
    admissible: bool
    side: Side
    case: Case
    subregion: Optional[str] = None
    witness: Optional[State] = None

    def __bool__(self) -> bool:
        return bool(self.admissible)


def incoming_case(u_l: State, g: float = GRAVITY, tol: float = CRITICAL_TOL) -> Case:
    f = u_l.v / celerity(u_l.h, g)
    if f > 1.0 + tol:
        return Case.B
    if f < -1.0 - tol:
        return Case.C
    return Case.A


def outgoing_case(u_r: State, g: float = GRAVITY, tol: float = CRITICAL_TOL) -> Case:
    return _MIRROR_CASE[incoming_case(u_r.reflect(), g, tol)]


_MIRROR_CASE = {Case.A: Case.A, Case.B: Case.C, Case.C: Case.B}


def _close(q: float, ref: float, h: float, g: float, tol: float) -> bool:
    return abs(q - ref) <= tol * (abs(ref) + h * celerity(h, g))


def _below(q: float, ref: float, h: float, g: float, tol: float) -> bool:
    return q <= ref + tol * (abs(ref) + h * celerity(h, g))


@dataclass(frozen=True)
class IncomingGeometry:
    """Depths bounding the incoming admissible set of one anchor."""

    anchor: State
    case: Case
    arc_lo: Optional[float]  # admissible arc of the Lax curve is [arc_lo, arc_hi]
    arc_hi: Optional[float]  # also the depth where the Lax curve meets C-
    vacuum_w: Optional[float]  # set when the Lax curve lies below C- everywhere
    excluded_lo: Optional[float] = None  # Case B: rejected arc [excluded_lo, arc_lo)


def incoming_geometry(u_l: State, g: float, tol: float) -> IncomingGeometry:
    case = incoming_case(u_l, g, tol)
    cp = critical_points_left(u_l, g)
    w = u_l.v + 2.0 * celerity(u_l.h, g)
    if w <= 0.0:
        return IncomingGeometry(u_l, case, None, None, w)
    if case is Case.B:
        return IncomingGeometry(u_l, case, cp.h_star, cp.h_minus_S, None, cp.h_plus_S)
    arc_hi = cp.h_minus_S if cp.h_minus_S is not None else cp.h_minus_R
    return IncomingGeometry(u_l, case, cp.h_plus_R, arc_hi, None)


def _shock2_q(u_m: State, h: float, g: float) -> float:
    return curve_q(CurveId.S2, u_m, min(h, u_m.h), g)


def _lower_boundary_q(geo: IncomingGeometry, h: float, g: float) -> float:
    """Upper edge of the sub-``C-`` part of the admissible set at depth ``h``."""
    c_minus = -h * celerity(h, g)
    if geo.vacuum_w is not None:
        return min(c_minus, h * (geo.vacuum_w + 2.0 * celerity(h, g)))
    h_c = geo.arc_hi
    if h > h_c:
        return c_minus
    u_c = State(h_c, -h_c * celerity(h_c, g))
    return _shock2_q(u_c, h, g)


def _shock_witness(u_l: State, u_hat: State, g: float) -> Optional[State]:
    """Middle state on the Lax curve of ``u_l`` joined to ``u_hat`` by a 2-shock."""

    def diff(h):
        return lax_left_v(u_l, h, g) - curve_v(CurveId.S2inv, u_hat, h, g)

    if not diff(u_hat.h) > 0.0:
        return None
    hi = 2.0 * u_hat.h
    while diff(hi) > 0.0:
        hi *= 2.0
    h_m = brentq(diff, u_hat.h, hi, xtol=1e-300, maxiter=200)
    return State(h_m, lax_left_q(u_l, h_m, g))


def _incoming(u_l: State, u_hat: State, g: float, tol: float, side: Side) -> RegionVerdict:
    geo = incoming_geometry(u_l, g, tol)
    h, q = u_hat.h, u_hat.q

    def verdict(ok, sub=None, witness=None):
        return RegionVerdict(bool(ok), side, geo.case, sub, witness)

    if geo.vacuum_w is not None:
        # whole Lax curve is torrential towards the junction; only the wet-middle
        # and sub-C- constraints remain
        inside = _below(q, _lower_boundary_q(geo, h, g), h, g, tol) and (
            u_hat.v - 2.0 * celerity(h, g) < geo.vacuum_w
        )
        return verdict(inside, "WholeCase" if inside else None)

    if geo.case is Case.B and abs(h - u_l.h) <= tol * u_l.h and _close(q, u_l.q, h, g, tol):
        return verdict(True, "I1", u_l)

    lo, hi = geo.arc_lo, geo.arc_hi
    if lo * (1.0 - tol) <= h <= hi * (1.0 + tol) and _close(q, lax_left_q(u_l, h, g), h, g, tol):
        return verdict(True, "I1")

    if _below(q, _lower_boundary_q(geo, h, g), h, g, tol):
        return verdict(True, "I2")

    u_m = _shock_witness(u_l, u_hat, g)
    if u_m is not None:
        f_m = u_m.v / celerity(u_m.h, g)
        if -1.0 - tol <= f_m < 0.0 and u_m.h >= lo and h <= conjugate_depth(u_m, g) * (1.0 + tol):
            return verdict(True, "I3", u_m)
    return verdict(False)


def attainable_incoming(u_l: State, u_hat: State, g: float = GRAVITY, tol: float = MEMBERSHIP_TOL) -> RegionVerdict:
    """Is ``u_hat`` a trace the incoming canal with state ``u_l`` can attain?"""
    return _incoming(u_l, u_hat, g, tol, Side.INCOMING)


_MIRROR_LABEL = {"I1": "O1", "I2": "O2", "I3": "O3", "WholeCase": "WholeCase", None: None}


def attainable_outgoing(u_r: State, u_tilde: State, g: float = GRAVITY, tol: float = MEMBERSHIP_TOL) -> RegionVerdict:
    """Is ``u_tilde`` a trace the outgoing canal with state ``u_r`` can attain?"""
    m = _incoming(u_r.reflect(), u_tilde.reflect(), g, tol, Side.OUTGOING)
    witness = m.witness.reflect() if m.witness is not None else None
    return RegionVerdict(m.admissible, Side.OUTGOING, _MIRROR_CASE[m.case], _MIRROR_LABEL[m.subregion], witness)


# ---------------------------------------------------------------------------
# Boundary polylines


def _incoming_boundary(u_l: State, h_samples: np.ndarray, g: float) -> dict[str, list[tuple[float, float]]]:
    geo = incoming_geometry(u_l, g, CRITICAL_TOL)
    out: dict[str, list[tuple[float, float]]] = {}
    if geo.vacuum_w is not None:
        out["WholeCase"] = [(h, _lower_boundary_q(geo, h, g)) for h in h_samples]
        return out
    lo, hi = geo.arc_lo, geo.arc_hi
    arc = [lo] + [h for h in h_samples if lo < h < hi] + [hi]
    out["I1"] = [(h, lax_left_q(u_l, h, g)) for h in arc]
    out["I2"] = [(h, _lower_boundary_q(geo, h, g)) for h in h_samples]

    # upper edge of I3: zero-speed 2-shocks from Lax-curve states with -1 <= F < 0
    h_zero = _zero_depth(u_l, g)
    locus = []
    for h_m in [h_zero] + [h for h in h_samples if h_zero < h < hi] + [hi]:
        u_m = State(h_m, lax_left_q(u_l, h_m, g))
        if u_m.q < 0.0:
            locus.append((conjugate_depth(u_m, g), u_m.q))
    out["I3"] = sorted(locus)
    if geo.case is Case.B:
        ex = [geo.excluded_lo] + [h for h in h_samples if geo.excluded_lo < h < lo] + [lo]
        out["excluded"] = [(h, lax_left_q(u_l, h, g)) for h in ex]
        out["anchor"] = [(u_l.h, u_l.q)]
    return out


def _zero_depth(u_l: State, g: float) -> float:
    h0 = zero_discharge_depth_left(u_l, g)
    if h0 <= u_l.h:
        return h0
    hi = 2.0 * u_l.h
    while lax_left_q(u_l, hi, g) > 0.0:
        hi *= 2.0
    return brentq(lambda h: lax_left_q(u_l, h, g), u_l.h, hi, xtol=1e-300)


def region_boundary(side: Side, anchor: State, h_samples=None, g: float = GRAVITY) -> dict[str, list[tuple[float, float]]]:
    """Polylines ``subregion -> [(h, q), ...]`` bounding the admissible set, ordered by ``h``."""
    if h_samples is None:
        h_samples = np.geomspace(anchor.h / 50.0, anchor.h * 50.0, 400)
    h_samples = np.sort(np.asarray(h_samples, dtype=float))
    if side is Side.INCOMING:
        return _incoming_boundary(anchor, h_samples, g)
    mirrored = _incoming_boundary(anchor.reflect(), h_samples, g)
    return {
        _MIRROR_LABEL.get(k, k): [(h, -q) for h, q in pts] for k, pts in mirrored.items()
    }
