"""Riemann solver at a simple junction (one incoming, one outgoing canal).

The traces ``u^b_1`` (downstream end of canal 1) and ``u^b_2`` (upstream end
of canal 2) must be attainable by their canals, share the discharge, and
satisfy one extra coupling relation: equal depth, equal specific energy or
equal momentum flux.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .curves import (
    VacuumError,
    conjugate_depth,
    critical_points_left,
    critical_points_right,
    lax_left_q,
    lax_left_v,
    lax_right_q,
    lax_right_v,
    middle_depth,
    sample_fan,
    solve_riemann,
)
from .halfriemann import (
    Case,
    attainable_incoming,
    attainable_outgoing,
    incoming_case,
    incoming_geometry,
)
from .state import CRITICAL_TOL, GRAVITY, State, celerity, froude, momentum_flux, specific_energy

RELATION_TOL = 1e-10


class Coupling(enum.Enum):
    EQUAL_HEIGHT = "equal_height"
    EQUAL_ENERGY = "energy"
    EQUAL_MOMENTUM = "momentum"


class CaseTag(enum.Enum):
    AA_INTERSECTION = "AA_Intersection"
    AA_CRITICAL_LEFT = "AA_CriticalLeft"
    AA_CRITICAL_RIGHT = "AA_CriticalRight"
    BA_SUBCRITICAL_INTERSECTION = "BA_SubcriticalIntersection"
    BA_PASS_THROUGH = "BA_PassThrough"
    BA_CRITICAL_RIGHT = "BA_CriticalRight"
    BB_PASS_THROUGH = "BB_PassThrough"
    ALT_ENERGY_PAIR = "Alt_EnergyPair"
    ALT_MOMENTUM_PAIR = "Alt_MomentumPair"
    CLASSICAL_SAMPLE = "Classical_Sample"


class JunctionError(ValueError):
    def __init__(self, message: str, u_l: State, u_r: State):
        super().__init__(message)
        self.u_l = u_l
        self.u_r = u_r


class NoSolution(JunctionError):
    """The coupling conditions admit no pair of attainable traces."""


class UnsupportedRegimePair(JunctionError):
    """The regimes of the two canal states fall outside the analysed cases."""


@dataclass(frozen=True)
class Candidate:
    trace_in: State
    trace_out: State
    admissible: bool
    label: str


@dataclass(frozen=True)
class JunctionSolution:
    trace_in: State
    trace_out: State
    case_tag: CaseTag
    coupling: Coupling = Coupling.EQUAL_HEIGHT
    candidates: tuple[Candidate, ...] = field(default=())


def regime_pair(u_l: State, u_r: State, g: float = GRAVITY) -> tuple[Case, Case]:
    """Cases of the incoming and outgoing states; critical states count as fluvial."""
    return incoming_case(u_l, g, CRITICAL_TOL), incoming_case(u_r, g, CRITICAL_TOL)


def _critical_plus(h: float, g: float) -> State:
    return State(h, h * celerity(h, g))


def _critical_minus(h: float, g: float) -> State:
    return State(h, -h * celerity(h, g))


def _first(*values):
    return next(v for v in values if v is not None)


def _solve_aa(u_l: State, u_r: State, g: float) -> JunctionSolution:
    cpl = critical_points_left(u_l, g)
    cpr = critical_points_right(u_r, g)
    # near-critical anchors within the dispatch band may carry the neighbouring branch
    h_plus_l = _first(cpl.h_plus_R, cpl.h_plus_S)
    h_minus_l = _first(cpl.h_minus_S, cpl.h_minus_R)
    h_plus_r = _first(cpr.h_plus_S, cpr.h_plus_R)
    h_minus_r = _first(cpr.h_minus_R, cpr.h_minus_S)
    if h_plus_r < h_plus_l:
        u_b = _critical_plus(h_plus_l, g)
        return JunctionSolution(u_b, u_b, CaseTag.AA_CRITICAL_LEFT)
    if h_minus_r > h_minus_l:
        u_b = _critical_minus(h_minus_r, g)
        return JunctionSolution(u_b, u_b, CaseTag.AA_CRITICAL_RIGHT)
    if u_l == u_r:
        return JunctionSolution(u_l, u_l, CaseTag.AA_INTERSECTION)
    h = middle_depth(u_l, u_r, g)
    u_b = State(h, lax_left_q(u_l, h, g))
    return JunctionSolution(u_b, u_b, CaseTag.AA_INTERSECTION)


def _solve_ba(u_l: State, u_r: State, g: float) -> JunctionSolution:
    cpl = critical_points_left(u_l, g)
    h_star, h_minus_l = cpl.h_star, cpl.h_minus_S

    def diff(h):
        return lax_left_v(u_l, h, g) - lax_right_v(u_r, h, g)

    if diff(h_star) >= 0.0 >= diff(h_minus_l):
        h = middle_depth(u_l, u_r, g)
        u_b = State(h, lax_left_q(u_l, h, g))
        return JunctionSolution(u_b, u_b, CaseTag.BA_SUBCRITICAL_INTERSECTION)
    if attainable_outgoing(u_r, u_l, g):
        return JunctionSolution(u_l, u_l, CaseTag.BA_PASS_THROUGH)
    if diff(h_minus_l) > 0.0:
        u_b = _critical_minus(critical_points_right(u_r, g).h_minus_R, g)
        return JunctionSolution(u_b, u_b, CaseTag.BA_CRITICAL_RIGHT)
    raise NoSolution("torrential inflow cannot reach the fluvial outflow at equal height", u_l, u_r)


def _solve_bb(u_l: State, u_r: State, g: float) -> JunctionSolution:
    if attainable_outgoing(u_r, u_l, g):
        return JunctionSolution(u_l, u_l, CaseTag.BB_PASS_THROUGH)
    raise NoSolution("incoming state is not attainable by the torrential outflow", u_l, u_r)


def classical_trace(u_l: State, u_r: State, g: float = GRAVITY) -> JunctionSolution:
    """Whole-line Riemann solution sampled at the junction, ``x / t = 0``."""
    try:
        fan = solve_riemann(u_l, u_r, g)
    except VacuumError as exc:
        raise NoSolution(str(exc), u_l, u_r) from exc
    u_b = sample_fan(fan, 0.0)
    return JunctionSolution(u_b, u_b, CaseTag.CLASSICAL_SAMPLE)


def solve_equal_height(u_l: State, u_r: State, g: float = GRAVITY, fallback: bool = False) -> JunctionSolution:
    """Mass conservation plus equal depths.

    With ``fallback=True`` regime pairs outside A->A, B->A and B->B are
    answered by :func:`classical_trace` instead of raising
    :class:`UnsupportedRegimePair`.
    """
    pair = regime_pair(u_l, u_r, g)
    if pair == (Case.A, Case.A):
        return _solve_aa(u_l, u_r, g)
    if pair == (Case.B, Case.A):
        return _solve_ba(u_l, u_r, g)
    if pair == (Case.B, Case.B):
        return _solve_bb(u_l, u_r, g)
    if fallback:
        return classical_trace(u_l, u_r, g)
    raise UnsupportedRegimePair(f"regime pair {pair[0].value}->{pair[1].value} is not supported", u_l, u_r)


# ---------------------------------------------------------------------------
# Alternative couplings


def partner_depth(u: State, coupling: Coupling, g: float = GRAVITY) -> Optional[float]:
    """Depth of the other state with the same discharge under ``coupling``.

    Energy: alternate depth of equal specific energy.  Momentum: conjugate
    depth of equal momentum flux.  Returns ``None`` for still water, whose
    alternate depth is zero.
    """
    f = froude(u, g)
    if coupling is Coupling.EQUAL_ENERGY:
        if f == 0.0:
            return None
        f2 = f * f
        return u.h * 0.25 * f2 * (1.0 + math.sqrt(1.0 + 8.0 / f2))
    if coupling is Coupling.EQUAL_MOMENTUM:
        if f == 0.0:
            return None
        return conjugate_depth(u, g)
    return u.h


def _pair(coupling: Coupling, u: State, from_in: bool, g: float) -> Optional[tuple[State, State]]:
    h = partner_depth(u, coupling, g)
    if h is None or not h > 1e-10:
        return None
    other = State(h, u.q)
    return (u, other) if from_in else (other, u)


def _arc_candidates(u_l, u_r, coupling, from_in, lo, hi, curve_q, g, samples):
    """Admissible runs of pairs generated from one trace moving along a Lax-curve arc."""

    def pair_at(h):
        return _pair(coupling, State(float(h), float(curve_q(h))), from_in, g)

    def ok(h):
        p = pair_at(h)
        return p is not None and bool(attainable_incoming(u_l, p[0], g)) and bool(attainable_outgoing(u_r, p[1], g))

    def refine(a, b):
        # a admissible, b not
        for _ in range(60):
            m = 0.5 * (a + b)
            if ok(m):
                a = m
            else:
                b = m
        return a

    hs = [float(h) for h in np.linspace(lo, hi, samples)]
    flags = [ok(h) for h in hs]
    out = []
    label = "in_arc" if from_in else "out_arc"
    i = 0
    while i < len(hs):
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(hs) and flags[j + 1]:
            j += 1
        start = hs[i] if i == 0 else refine(hs[i], hs[i - 1])
        end = hs[j] if j == len(hs) - 1 else refine(hs[j], hs[j + 1])
        for h in sorted({start, end}):
            p = pair_at(h)
            out.append(Candidate(p[0], p[1], True, label))
        i = j + 1
    return out


def enumerate_candidates(
    u_l: State, u_r: State, coupling: Coupling, g: float = GRAVITY, samples: int = 41
) -> tuple[Candidate, ...]:
    """Pairs with one subcritical and one supercritical trace satisfying ``coupling``.

    Admissible pairs come first, ordered by ``|h^b_1 - h_l|``.
    """
    cands: list[Candidate] = []
    geo_in = incoming_geometry(u_l, g, CRITICAL_TOL)
    geo_out = incoming_geometry(u_r.reflect(), g, CRITICAL_TOL)

    if geo_in.arc_lo is not None:
        cands += _arc_candidates(
            u_l, u_r, coupling, True, geo_in.arc_lo, geo_in.arc_hi, lambda h: lax_left_q(u_l, h, g), g, samples
        )
    if geo_out.arc_lo is not None:
        cands += _arc_candidates(
            u_l, u_r, coupling, False, geo_out.arc_lo, geo_out.arc_hi, lambda h: lax_right_q(u_r, h, g), g, samples
        )
    # isolated anchors: a torrential state flowing into (out of) the junction
    for u, from_in, label in ((u_l, True, "anchor_in"), (u_r, False, "anchor_out")):
        if froude(u, g) ** 2 <= 1.0:
            continue
        p = _pair(coupling, u, from_in, g)
        if p is not None:
            ok = bool(attainable_incoming(u_l, p[0], g)) and bool(attainable_outgoing(u_r, p[1], g))
            cands.append(Candidate(p[0], p[1], ok, label))

    unique = {}
    for c in cands:
        unique.setdefault((c.trace_in, c.trace_out), c)
    return tuple(sorted(unique.values(), key=lambda c: (not c.admissible, abs(c.trace_in.h - u_l.h))))


def _solve_alternative(u_l, u_r, coupling, tag, g, enumerate, fallback):
    try:
        base: Optional[JunctionSolution] = solve_equal_height(u_l, u_r, g, fallback)
    except NoSolution:
        base = None
    cands = enumerate_candidates(u_l, u_r, coupling, g) if (enumerate or base is None) else ()
    if base is not None:
        return replace(base, coupling=coupling, candidates=cands)
    admissible = [c for c in cands if c.admissible]
    if not admissible:
        raise NoSolution(f"no admissible {coupling.value} pair", u_l, u_r)
    best = admissible[0]
    return JunctionSolution(best.trace_in, best.trace_out, tag, coupling, cands)


def solve_equal_energy(
    u_l: State, u_r: State, g: float = GRAVITY, enumerate: bool = True, fallback: bool = False
) -> JunctionSolution:
    """Mass conservation plus equal specific energy."""
    return _solve_alternative(u_l, u_r, Coupling.EQUAL_ENERGY, CaseTag.ALT_ENERGY_PAIR, g, enumerate, fallback)


def solve_equal_momentum(
    u_l: State, u_r: State, g: float = GRAVITY, enumerate: bool = True, fallback: bool = False
) -> JunctionSolution:
    """Mass conservation plus equal momentum flux ``q^2/h + g h^2/2``.

    For a torrential inflow the pair ``(u_l, (h*_l, q_l))`` - a hydraulic
    jump sitting at the junction - is always among the candidates.
    """
    return _solve_alternative(u_l, u_r, Coupling.EQUAL_MOMENTUM, CaseTag.ALT_MOMENTUM_PAIR, g, enumerate, fallback)


def solve(u_l: State, u_r: State, coupling: Coupling = Coupling.EQUAL_HEIGHT, g: float = GRAVITY, **kwargs) -> JunctionSolution:
    if coupling is Coupling.EQUAL_HEIGHT:
        return solve_equal_height(u_l, u_r, g, fallback=kwargs.get("fallback", False))
    if coupling is Coupling.EQUAL_ENERGY:
        return solve_equal_energy(u_l, u_r, g, **kwargs)
    return solve_equal_momentum(u_l, u_r, g, **kwargs)


# ---------------------------------------------------------------------------
# Validation


def relation_residual(trace_in: State, trace_out: State, coupling: Coupling, g: float = GRAVITY) -> float:
    """Relative residual of the coupling relation between two traces."""
    if coupling is Coupling.EQUAL_HEIGHT:
        a, b = trace_in.h, trace_out.h
    elif coupling is Coupling.EQUAL_ENERGY:
        a, b = specific_energy(trace_in, g), specific_energy(trace_out, g)
    else:
        a, b = momentum_flux(trace_in, g), momentum_flux(trace_out, g)
    return abs(a - b) / max(abs(a), abs(b))


@dataclass(frozen=True)
class VerifyReport:
    mass: bool
    relation: bool
    incoming: bool
    outgoing: bool
    relation_residual: float

    @property
    def ok(self) -> bool:
        return self.mass and self.relation and self.incoming and self.outgoing

    def as_dict(self) -> dict:
        return {
            "mass": self.mass,
            "relation": self.relation,
            "incoming": self.incoming,
            "outgoing": self.outgoing,
            "relation_residual": self.relation_residual,
            "ok": self.ok,
        }


def verify(
    sol: JunctionSolution, u_l: State, u_r: State, coupling: Optional[Coupling] = None, g: float = GRAVITY
) -> VerifyReport:
    """Re-check mass, the coupling relation and both attainability conditions."""
    coupling = sol.coupling if coupling is None else coupling
    # equal-state traces satisfy every coupling relation
    res = 0.0 if sol.trace_in == sol.trace_out else relation_residual(sol.trace_in, sol.trace_out, coupling, g)
    return VerifyReport(
        mass=sol.trace_in.q == sol.trace_out.q,
        relation=res <= RELATION_TOL,
        incoming=bool(attainable_incoming(u_l, sol.trace_in, g)),
        outgoing=bool(attainable_outgoing(u_r, sol.trace_out, g)),
        relation_residual=res,
    )
