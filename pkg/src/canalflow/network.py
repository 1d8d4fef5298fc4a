"""SSP-RK3 time stepping of one canal or of a simple two-canal junction.

Canal 1 ends at the junction (its right edge), canal 2 starts there.  At
every Runge-Kutta stage the junction solver is fed the limited polynomial
traces on both sides and its boundary states define the junction fluxes
``f(u^b_1)`` and ``f(u^b_2)``.  Free extremities use a copy-state ghost,
i.e. the physical flux of the boundary trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dg import DGField, ShallowWater, check_wet, local_lf, spatial_residual, stable_dt, tvb_limit
from .junction import Coupling, JunctionError, JunctionSolution, regime_pair, solve
from .state import GRAVITY, State

RK3_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)
RK3_TIMES = (0.0, 1.0, 0.5)


class CFLViolation(ValueError):
    """Requested step exceeds the CFL bound."""


class JunctionFailure(RuntimeError):
    """The junction solver found no admissible traces during a stage."""

    def __init__(self, t: float, stage: int, u_l: State, u_r: State, cause: JunctionError, g: float = GRAVITY):
        pair = regime_pair(u_l, u_r, g)
        super().__init__(
            f"junction failed at t={t!r} (stage {stage}): {cause}; "
            f"U_l={tuple(u_l)}, U_r={tuple(u_r)}, regimes {pair[0].value}->{pair[1].value}"
        )
        self.t = t
        self.stage = stage
        self.u_l = u_l
        self.u_r = u_r
        self.cause = cause
        self.regimes = (pair[0].value, pair[1].value)

    def diagnostics(self) -> dict:
        return {
            "t": self.t,
            "stage": self.stage,
            "U_l": list(self.u_l),
            "U_r": list(self.u_r),
            "regimes": list(self.regimes),
            "reason": str(self.cause),
        }


def _ssp_rk3(fields, dt, rhs, limit):
    """One Shu-Osher SSP-RK3 step; ``rhs(fields, stage)`` returns residuals."""
    u0 = [f.coeffs for f in fields]
    r = rhs(fields, 0)
    s1 = limit([DGField(f.grid, c + dt * d) for f, c, d in zip(fields, u0, r)])
    r = rhs(s1, 1)
    s2 = limit(
        [DGField(f.grid, 0.75 * c + 0.25 * (s.coeffs + dt * d)) for f, c, s, d in zip(fields, u0, s1, r)]
    )
    r = rhs(s2, 2)
    return limit(
        [DGField(f.grid, c / 3.0 + 2.0 / 3.0 * (s.coeffs + dt * d)) for f, c, s, d in zip(fields, u0, s2, r)]
    )


class _Stepper:
    field_list: list[DGField]
    physics: object
    cfl: float
    t: float

    def stable_dt(self) -> float:
        return stable_dt(self.field_list, self.physics, self.cfl)

    def step(self, dt: Optional[float] = None) -> float:
        bound = self.stable_dt()
        if dt is None:
            dt = bound
        elif dt > bound * (1.0 + 1e-12):
            raise CFLViolation(f"dt={dt!r} exceeds the CFL bound {bound!r}")
        self._step(dt)
        self.t += dt
        self.steps += 1
        return dt

    def advance(
        self,
        t_end: float,
        callback: Optional[Callable[[float, "_Stepper"], None]] = None,
        interval: Optional[float] = None,
        max_steps: Optional[int] = None,
    ) -> None:
        """Step to ``t_end``, calling ``callback(t, self)`` at ``t`` and every ``interval``."""
        n_out = 0
        next_out = self.t
        if callback is not None:
            callback(self.t, self)
            n_out = 1
            next_out = self.t + interval if interval else t_end
        start = self.steps
        while self.t < t_end:
            if max_steps is not None and self.steps - start >= max_steps:
                break
            target = min(t_end, next_out) if callback is not None else t_end
            dt = min(self.stable_dt(), target - self.t)
            self.step(dt)
            if target - self.t <= 1e-12 * max(1.0, abs(target)):
                self.t = target
            if callback is not None and self.t >= next_out:
                callback(self.t, self)
                n_out += 1
                next_out = min(t_end, self.t + interval) if interval else t_end
                if self.t >= t_end:
                    break


class CanalSim(_Stepper):
    """A single canal with copy-state (``neumann``) or ``periodic`` ends."""

    def __init__(self, field: DGField, physics=None, boundary: str = "neumann", cfl: float = 0.15,
                 limiter: bool = False, m_tvb: float = 0.0):
        if boundary not in ("neumann", "periodic"):
            raise ValueError(f"unknown boundary {boundary!r}")
        self.field = field
        self.physics = ShallowWater() if physics is None else physics
        self.boundary = boundary
        self.cfl = cfl
        self.limiter = limiter
        self.m_tvb = m_tvb
        self.t = 0.0
        self.steps = 0

    @property
    def field_list(self) -> list[DGField]:
        return [self.field]

    def _ends(self, f: DGField):
        if self.boundary == "periodic":
            flux = local_lf(self.physics, f.right_traces()[-1], f.left_traces()[0])
            return flux, flux
        return self.physics.flux(f.left_traces()[0]), self.physics.flux(f.right_traces()[-1])

    def _rhs(self, fields, stage):
        f = fields[0]
        check_wet(f, self.physics)
        fl, fr = self._ends(f)
        return [spatial_residual(f, fl, fr, self.physics)]

    def _limit(self, fields):
        if not self.limiter:
            return fields
        f = fields[0]
        avg = f.coeffs[:, :, 0]
        if self.boundary == "periodic":
            la, ra = avg[-1], avg[0]
        else:
            la, ra = avg[0], avg[-1]
        return [tvb_limit(f, la, ra, self.physics, self.m_tvb)]

    def _step(self, dt):
        (self.field,) = _ssp_rk3([self.field], dt, self._rhs, self._limit)


@dataclass(frozen=True)
class StageRecord:
    t: float
    stage: int
    case_tag: Optional[str]
    flux_in: tuple[float, float]
    flux_out: tuple[float, float]


class NetworkSim(_Stepper):
    """Two canals joined at ``x = 0``.

    Parameters
    ----------
    field1, field2 : DGField
        Initial data on canal 1 (upstream, ending at the junction) and canal 2.
    coupling : Coupling
        Junction coupling condition.
    junction : {"solver", "interior"}
        ``"interior"`` replaces the junction by an ordinary Lax-Friedrichs
        interface, turning the network into a single domain.
    fallback : bool
        Regime pairs outside the analysed cases use the classical Riemann
        solution sampled at the junction instead of halting.
    record_stages : bool
        Keep a :class:`StageRecord` for every Runge-Kutta stage.
    """

    def __init__(
        self,
        field1: DGField,
        field2: DGField,
        coupling: Coupling = Coupling.EQUAL_HEIGHT,
        cfl: float = 0.15,
        limiter: bool = True,
        m_tvb: float = 0.0,
        g: float = GRAVITY,
        junction: str = "solver",
        physics=None,
        fallback: bool = True,
        record_stages: bool = False,
    ):
        if junction not in ("solver", "interior"):
            raise ValueError(f"unknown junction mode {junction!r}")
        self.fields = [field1, field2]
        self.coupling = coupling
        self.cfl = cfl
        self.limiter = limiter
        self.m_tvb = m_tvb
        self.g = g
        self.junction = junction
        self.physics = ShallowWater(g) if physics is None else physics
        self.fallback = fallback
        self.record_stages = record_stages
        self.t = 0.0
        self.steps = 0
        self.boundary_inflow = 0.0  # volume entered through the two free ends
        self.initial_volume = self.total_volume()
        self.case_history: list[tuple[float, str]] = []
        self.stage_records: list[StageRecord] = []
        self.last_solution: Optional[JunctionSolution] = None
        self._stage_inflow = [0.0, 0.0, 0.0]
        self._t_stage = 0.0
        self._dt = 0.0

    @property
    def field_list(self) -> list[DGField]:
        return self.fields

    def total_volume(self) -> float:
        return sum(f.volume() for f in self.fields)

    def mass_drift(self) -> float:
        """Relative volume error after accounting for the outer-boundary fluxes."""
        v = self.total_volume()
        return abs(v - self.initial_volume - self.boundary_inflow) / self.initial_volume

    def solve_junction(self, u_l: State, u_r: State, stage: int = 0) -> JunctionSolution:
        try:
            return solve(u_l, u_r, self.coupling, self.g, fallback=self.fallback, **(
                {} if self.coupling is Coupling.EQUAL_HEIGHT else {"enumerate": False}))
        except JunctionError as exc:
            raise JunctionFailure(self._t_stage, stage, u_l, u_r, exc, self.g) from exc

    def _junction_fluxes(self, f1: DGField, f2: DGField, stage: int):
        ub1 = f1.right_traces()[-1]
        ub2 = f2.left_traces()[0]
        if self.junction == "interior":
            flux = local_lf(self.physics, ub1, ub2)
            return flux, flux, None
        sol = self.solve_junction(State(float(ub1[0]), float(ub1[1])), State(float(ub2[0]), float(ub2[1])), stage)
        self.last_solution = sol
        fin = self.physics.flux(np.array([sol.trace_in.h, sol.trace_in.q]))
        fout = self.physics.flux(np.array([sol.trace_out.h, sol.trace_out.q]))
        return fin, fout, sol.case_tag.value

    def _rhs(self, fields, stage):
        f1, f2 = fields
        self._t_stage = self.t + RK3_TIMES[stage] * self._dt
        for f in fields:
            check_wet(f, self.physics)
        left = self.physics.flux(f1.left_traces()[0])
        right = self.physics.flux(f2.right_traces()[-1])
        fin, fout, tag = self._junction_fluxes(f1, f2, stage)
        self._stage_inflow[stage] = float(left[0] - right[0])
        if tag is not None and (not self.case_history or self.case_history[-1][1] != tag):
            self.case_history.append((self._t_stage, tag))
        if self.record_stages:
            self.stage_records.append(
                StageRecord(self._t_stage, stage, tag, (float(fin[0]), float(fin[1])), (float(fout[0]), float(fout[1])))
            )
        return [spatial_residual(f1, left, fin, self.physics), spatial_residual(f2, fout, right, self.physics)]

    def _limit(self, fields):
        if not self.limiter:
            return fields
        f1, f2 = fields
        a1, a2 = f1.coeffs[:, :, 0], f2.coeffs[:, :, 0]
        if self.junction == "interior":
            j1, j2 = a2[0], a1[-1]
        else:
            j1, j2 = a1[-1], a2[0]
        return [
            tvb_limit(f1, a1[0], j1, self.physics, self.m_tvb),
            tvb_limit(f2, j2, a2[-1], self.physics, self.m_tvb),
        ]

    def _step(self, dt):
        self._dt = dt
        self.fields = _ssp_rk3(self.fields, dt, self._rhs, self._limit)
        self.boundary_inflow += dt * sum(w * s for w, s in zip(RK3_WEIGHTS, self._stage_inflow))
