"""Acceptance criteria 1 to 9, one test each.

Every test prints a ``criterion N: PASS|FAIL`` line (also collected into the
terminal summary by ``conftest.py``).  Run standalone with
``python3 tests/test_acceptance.py``.
"""

import math

import numpy as np
import pytest
from numpy.polynomial import legendre
from scipy.optimize import brentq

from oracles import count_disagreements
from canalflow.curves import (
    Rarefaction,
    Shock,
    conjugate_depth,
    critical_points_left,
    critical_points_right,
    lax_left_q,
    lax_left_v,
    lax_right_q,
    lax_right_v,
    solve_riemann,
)
from canalflow.dg import CanalGrid, constant_field, project_initial
from canalflow.junction import (
    CaseTag,
    Coupling,
    NoSolution,
    regime_pair,
    relation_residual,
    solve_equal_energy,
    solve_equal_height,
    solve_equal_momentum,
)
from canalflow.halfriemann import Case
from canalflow.network import CanalSim, NetworkSim
from canalflow.state import GRAVITY, State, celerity, flux, froude

G = GRAVITY
RESULTS: list[str] = []

TEST1 = (State(0.25, 0.025), State(2.5, 0.25))
TEST2 = (State(0.2, 3.0), State(1.8, 4.0))


def report(n, checks):
    """Print and record one line for criterion ``n``; ``checks`` maps a label to ``(ok, detail)``."""
    ok = all(c[0] for c in checks.values())
    parts = "; ".join(f"{k}={'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in checks.items())
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}: {parts}"
    print(line)
    RESULTS.append(line)
    failed = [k for k, v in checks.items() if not v[0]]
    assert ok, f"criterion {n} failed: {failed}; {parts}"


def log_state(rng, f_lo, f_hi, h_lo=0.05, h_hi=5.0):
    h = float(np.exp(rng.uniform(math.log(h_lo), math.log(h_hi))))
    return State(h, float(h * math.sqrt(G * h) * rng.uniform(f_lo, f_hi)))


def network(u1, u2, cells=200, record_stages=False):
    f1 = constant_field(CanalGrid(1.0, cells, 2, -1.0), u1)
    f2 = constant_field(CanalGrid(1.0, cells, 2, 0.0), u2)
    return NetworkSim(f1, f2, Coupling.EQUAL_HEIGHT, cfl=0.15, record_stages=record_stages)


def froude_of(field):
    a = field.averages()
    return a[:, 1] / a[:, 0] / np.sqrt(G * a[:, 0]), a


def bands(mask):
    """Run-length labels of a torrential mask, e.g. ``["fluvial", "torrential"]``."""
    labels = ["torrential" if m else "fluvial" for m in mask]
    return [lab for i, lab in enumerate(labels) if i == 0 or lab != labels[i - 1]]


def critical_right_root(u_r):
    """``u^-_{r,R}`` by bracketing the 2-rarefaction against ``v = -sqrt(g h)``."""
    cr = celerity(u_r.h)
    h = brentq(lambda h: u_r.v - 2 * cr + 3 * math.sqrt(G * h), 1e-12, u_r.h, xtol=1e-15, rtol=1e-15)
    return State(h, -h * math.sqrt(G * h))


def test_criterion_1_paper_point():
    u_r = TEST1[1]
    h = critical_points_right(u_r).h_minus_R
    q = lax_right_q(u_r, h)
    report(1, {
        "h": (abs(h - 1.0887) < 0.01, f"h={h:.6f}"),
        "q": (abs(q + 3.558) < 0.01, f"q={q:.6f}"),
        "on C-": (abs(q + h * math.sqrt(G * h)) < 1e-12, "v=-sqrt(gh)"),
    })


def test_criterion_2_fluvial_to_fluvial():
    u_l, u_r = TEST1
    sol = solve_equal_height(u_l, u_r)
    ref = critical_right_root(u_r)
    err = max(abs(sol.trace_in.h - ref.h), abs(sol.trace_in.q - ref.q))

    sim = network(u_l, u_r)
    # the 1-shock on canal 1 travels at about -4.8, so by t = 0.115 it is past mid-canal
    sim.advance(0.115)
    f1, a1 = froude_of(sim.fields[0])
    f2, _ = froude_of(sim.fields[1])
    tor1 = np.abs(f1) > 1
    pattern1 = bands(tor1)
    network_pattern = bands(np.concatenate([tor1, np.abs(f2) > 1]))
    front = sim.fields[0].grid.centers[np.argmax(tor1)] if tor1.any() else float("nan")
    report(2, {
        "case": (sol.case_tag is CaseTag.AA_CRITICAL_RIGHT, sol.case_tag.value),
        "trace": (err < 1e-10 and sol.trace_in == sol.trace_out, f"|u_b-root|={err:.1e}"),
        "front past mid canal 1": (front < -0.5, f"x={front:.3f}"),
        "v<0 in band": (bool(tor1.any() and np.all(a1[tor1, 1] < 0)), "q<0"),
        "canal-1 bands": (pattern1 == ["fluvial", "torrential", "fluvial"], " | ".join(pattern1)),
        "network bands": (network_pattern == ["fluvial", "torrential", "fluvial"], " | ".join(network_pattern)),
    })


def test_criterion_3_torrential_to_fluvial():
    u_l, u_r = TEST2
    sol = solve_equal_height(u_l, u_r)
    sim = network(u_l, u_r)
    edges = []

    def snap(t, s):
        f2, _ = froude_of(s.fields[1])
        tor = np.abs(f2) > 1
        n = int(np.argmin(tor)) if not tor.all() else tor.size  # contiguous band from the junction
        edges.append(float(s.fields[1].grid.edges[n]))

    sim.advance(0.1, snap, 0.02)
    steps = np.diff(edges)
    report(3, {
        "case": (sol.case_tag is CaseTag.BA_PASS_THROUGH, sol.case_tag.value),
        "trace": (sol.trace_in == u_l and sol.trace_out == u_l, f"{tuple(sol.trace_in)}"),
        "edge advances": (bool(np.all(steps > 0)), "edges " + ", ".join(f"{e:.3f}" for e in edges)),
    })


def test_criterion_4_oracle_equivalence():
    rng = np.random.default_rng(4)
    checks = {}
    for side in ("in", "out"):
        for case in "ABC":
            bad, shell, n_in = count_disagreements(rng, side, case, 10_000)
            checks[f"{side}-{case}"] = (bad == 0, f"{bad} bad, {shell} in shell, {n_in} admissible")
    report(4, checks)


def test_criterion_5_riemann_residuals():
    rng = np.random.default_rng(5)
    worst = {"lax": 0.0, "rh": 0.0, "inv": 0.0}
    n_shock = n_raref = n = 0
    while n < 10_000:
        u_l, u_r = log_state(rng, -1, 1), log_state(rng, -1, 1)
        if u_l.v + 2 * celerity(u_l.h) <= u_r.v - 2 * celerity(u_r.h):
            continue
        n += 1
        fan = solve_riemann(u_l, u_r)
        m = fan.middle
        scale = abs(m.v) + celerity(m.h)
        worst["lax"] = max(worst["lax"], abs(lax_left_v(u_l, m.h) - lax_right_v(u_r, m.h)) / scale)
        for wave, a, b, fam in ((fan.wave1, u_l, m, 1), (fan.wave2, m, u_r, 2)):
            if isinstance(wave, Shock):
                n_shock += 1
                jump = np.array(flux(b)) - np.array(flux(a))
                res = np.abs(jump - wave.speed * (np.array(tuple(b)) - np.array(tuple(a))))
                fscale = 1.0 + np.abs(np.array(flux(a))) + np.abs(np.array(flux(b)))
                worst["rh"] = max(worst["rh"], float(np.max(res / fscale)))
            elif isinstance(wave, Rarefaction):
                n_raref += 1
                sign = 1 if fam == 1 else -1
                wa = a.v + sign * 2 * celerity(a.h)
                wb = b.v + sign * 2 * celerity(b.h)
                worst["inv"] = max(worst["inv"], abs(wa - wb) / scale, abs(wave.invariant - wa) / scale)
    report(5, {
        "lax intersection": (worst["lax"] < 1e-10, f"max {worst['lax']:.1e}"),
        "Rankine-Hugoniot": (worst["rh"] < 1e-8, f"max {worst['rh']:.1e} over {n_shock} shocks"),
        "invariants": (worst["inv"] < 1e-10, f"max {worst['inv']:.1e} over {n_raref} rarefactions"),
    })


def test_criterion_6_curve_geometry():
    rng = np.random.default_rng(6)
    fails = dict.fromkeys(["monotone", "shape", "zero", "extremum", "conjugate"], 0)
    t = np.linspace(-3.0, 3.0, 31)
    for _ in range(10_000):
        u = log_state(rng, -3, 3)
        hs = u.h * np.exp(t)
        vl = np.array([lax_left_v(u, h) for h in hs])
        vr = np.array([lax_right_v(u, h) for h in hs])
        fails["monotone"] += not (np.all(np.diff(vl) < 0) and np.all(np.diff(vr) > 0))
        # second divided differences of q = h v on the non-uniform grid
        sl = np.diff(hs * vl) / np.diff(hs)
        sr = np.diff(hs * vr) / np.diff(hs)
        tol = 1e-9 * (abs(u.v) + celerity(u.h))
        fails["shape"] += not (np.all(np.diff(sl) < tol) and np.all(np.diff(sr) > -tol))

        f = froude(u)
        if -2 < f <= 0:
            h0 = (u.v + 2 * celerity(u.h)) ** 2 / (4 * G)
            fails["zero"] += abs(lax_left_q(u, h0)) > 1e-12 * u.h * celerity(u.h)
        c = celerity(u.h)
        hmax = critical_points_left(State(u.h, u.h * c)).h_max
        hmin = critical_points_right(State(u.h, -u.h * c)).h_min
        fails["extremum"] += abs(hmax - u.h) > 1e-10 * u.h or abs(hmin - u.h) > 1e-10 * u.h
        if f > 1:
            fails["conjugate"] += froude(State(conjugate_depth(u), u.q)) >= 1
        elif f < -1:
            fails["conjugate"] += froude(State(critical_points_right(u).h_star, u.q)) <= -1
    report(6, {k: (v == 0, f"{v} failures") for k, v in fails.items()})


def _l2_against(coarse, fine):
    """L2 distance of the coarse depth polynomial from the fine one, at the fine Gauss points."""
    x = fine.node_positions()
    gc = coarse.grid
    m = np.minimum(((x - gc.x_left) / gc.dx).astype(int), gc.cells - 1)
    xi = 2.0 * (x - gc.centers[m]) / gc.dx
    vals = np.einsum("mql,mql->mq", legendre.legvander(xi, gc.degree), coarse.coeffs[m, 0, :])
    _, w = legendre.leggauss(fine.grid.degree + 2)
    return math.sqrt(np.sum((vals - fine.at_nodes()[..., 0]) ** 2 * w) * fine.grid.dx / 2)


def test_criterion_7_convergence():
    def profile(x):
        return 1.0 + 0.1 * np.sin(2 * np.pi * x), 0.3 + 0.05 * np.cos(2 * np.pi * x)

    def run(m):
        sim = CanalSim(project_initial(profile, CanalGrid(1.0, m, 2)), boundary="periodic", cfl=0.15)
        sim.advance(0.05)
        return sim.field

    grids = (20, 40, 80, 160)
    ref = run(640)
    errs = [_l2_against(run(m), ref) for m in grids]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    report(7, {
        "order": (orders[-1] >= 2.5, "orders " + ", ".join(f"{o:.2f}" for o in orders)),
    })


def test_criterion_8_conservation():
    sim = network(*TEST1, record_stages=True)
    for _ in range(1000):
        sim.step()
    drift = sim.mass_drift()
    mismatched = sum(r.flux_in[0] != r.flux_out[0] for r in sim.stage_records)
    report(8, {
        "drift": (drift < 1e-10, f"{drift:.1e} after {sim.steps} steps"),
        "mass flux": (mismatched == 0 and len(sim.stage_records) == 3000,
                      f"{mismatched} of {len(sim.stage_records)} stages differ"),
    })


def test_criterion_9_coupling_residuals():
    rng = np.random.default_rng(9)
    worst = 0.0
    solved = unsolved = 0
    ranges = [((-0.95, 0.95), (-0.95, 0.95)), ((1.05, 4.0), (-0.95, 0.95)), ((1.05, 4.0), (1.05, 4.0))]
    for _ in range(250):
        for lo_hi_l, lo_hi_r in ranges:
            u_l, u_r = log_state(rng, *lo_hi_l), log_state(rng, *lo_hi_r)
            if regime_pair(u_l, u_r) not in ((Case.A, Case.A), (Case.B, Case.A), (Case.B, Case.B)):
                continue
            for fn, coupling in ((solve_equal_energy, Coupling.EQUAL_ENERGY),
                                 (solve_equal_momentum, Coupling.EQUAL_MOMENTUM)):
                try:
                    sol = fn(u_l, u_r)
                except NoSolution:
                    unsolved += 1
                    continue
                solved += 1
                worst = max(worst, relation_residual(sol.trace_in, sol.trace_out, coupling))
    u_l, u_r = TEST2
    sol = solve_equal_momentum(u_l, u_r)
    jump = [c for c in sol.candidates if c.trace_in == u_l and abs(c.trace_out.h - 2.9307) < 5e-4
            and c.trace_out.q == u_l.q]
    jres = relation_residual(jump[0].trace_in, jump[0].trace_out, Coupling.EQUAL_MOMENTUM) if jump else math.inf
    report(9, {
        "relations": (worst < 1e-10, f"max {worst:.1e} over {solved} solutions ({unsolved} NoSolution)"),
        "jump pair": (len(jump) == 1 and jres < 1e-10,
                      f"h*={jump[0].trace_out.h:.6f}, residual {jres:.1e}" if jump else "missing"),
    })


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
