"""Exact Riemann, half-Riemann and junction solvers for 1D shallow water, with an RKDG network simulator."""

from .curves import CurveId, VacuumError, critical_points_left, critical_points_right, curve_q, curve_v, solve_riemann
from .dg import CanalGrid, DGField, cell_averages, evaluate, lax_friedrichs_flux, project_initial, spatial_residual
from .halfriemann import Case, RegionVerdict, Side, attainable_incoming, attainable_outgoing, region_boundary
from .junction import (
    CaseTag,
    Coupling,
    JunctionSolution,
    NoSolution,
    UnsupportedRegimePair,
    solve,
    solve_equal_energy,
    solve_equal_height,
    solve_equal_momentum,
    verify,
)
from .network import CanalSim, NetworkSim
from .scenario import RunReport, Scenario, parse_scenario, render, run
from .state import GRAVITY, DryStateError, Regime, State, classify, froude

__version__ = "0.1.0"

__all__ = [
    "GRAVITY", "CanalGrid", "CanalSim", "Case", "CaseTag", "Coupling", "CurveId", "DGField", "DryStateError",
    "JunctionSolution", "NetworkSim", "NoSolution", "Regime", "RegionVerdict", "RunReport", "Scenario", "Side",
    "State", "UnsupportedRegimePair", "VacuumError", "attainable_incoming", "attainable_outgoing", "cell_averages",
    "classify", "critical_points_left", "critical_points_right", "curve_q", "curve_v", "evaluate", "froude",
    "lax_friedrichs_flux", "parse_scenario", "project_initial", "region_boundary", "render", "run", "solve",
    "solve_equal_energy", "solve_equal_height", "solve_equal_momentum", "solve_riemann", "spatial_residual", "verify",
]
