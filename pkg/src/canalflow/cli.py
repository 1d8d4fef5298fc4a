"""Command-line entry point: ``canalflow simulate|curves|regions|junction``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .curves import CurveId, default_depth_grid, tabulate_curves
from .halfriemann import Side, region_boundary
from .junction import Coupling, NoSolution, UnsupportedRegimePair, solve, verify
from .scenario import EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_OK, ScenarioError, load_scenario, run
from .state import GRAVITY, DryStateError, State

OUTPUT_ENV = "CANALFLOW_OUTPUT_DIR"


def _output_dir(args, default: str) -> Path:
    if args.output_dir:
        path = Path(args.output_dir)
    else:
        path = Path(os.environ.get(OUTPUT_ENV) or default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _g(x: float) -> str:
    return f"{x:.17g}"


def _write_polylines(path: Path, polylines: dict, label: str) -> None:
    rows = [f"{label},h,q"]
    for name, pts in polylines.items():
        rows += [f"{name},{_g(h)},{_g(q)}" for h, q in pts]
    path.write_text("\n".join(rows) + "\n")


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output_dir:
        out = args.output_dir
    else:
        out = os.environ.get(OUTPUT_ENV) or scenario.output_dir
    report = run(scenario, out)
    print(f"{report.status}: t={_g(report.t_final)} steps={report.steps} snapshots={len(report.snapshots)}")
    if report.failure:
        print(f"failure: {report.failure}", file=sys.stderr)
    return report.exit_code


def cmd_curves(args) -> int:
    anchor = State(args.h0, args.q0)
    out = _output_dir(args, ".")
    rows = tabulate_curves(anchor, default_depth_grid(anchor, args.samples), args.g)
    polylines: dict = {c.value: [] for c in CurveId}
    for cid, h, q in rows:
        polylines[cid].append((h, q))
    path = out / "curves.csv"
    _write_polylines(path, polylines, "curve")
    print(path)
    return EXIT_OK


def cmd_regions(args) -> int:
    anchor = State(args.h, args.q)
    side = Side.INCOMING if args.side == "in" else Side.OUTGOING
    out = _output_dir(args, ".")
    for name, pts in region_boundary(side, anchor, g=args.g).items():
        path = out / f"region_{args.side}_{name}.csv"
        path.write_text("h,q\n" + "".join(f"{_g(h)},{_g(q)}\n" for h, q in pts))
        print(path)
    return EXIT_OK


def cmd_junction(args) -> int:
    u_l, u_r = State(args.hl, args.ql), State(args.hr, args.qr)
    coupling = Coupling(args.coupling)
    out = _output_dir(args, ".")
    boundaries = {f"in_{k}": v for k, v in region_boundary(Side.INCOMING, u_l, g=args.g).items()}
    boundaries.update({f"out_{k}": v for k, v in region_boundary(Side.OUTGOING, u_r, g=args.g).items()})
    _write_polylines(out / "junction_regions.csv", boundaries, "subregion")

    rows = ["role,h,q,case_tag,admissible"]
    code = EXIT_OK
    try:
        sol = solve(u_l, u_r, coupling, args.g)
    except UnsupportedRegimePair as exc:
        rows.append(f"error,,,UnsupportedRegimePair,{exc}")
    except NoSolution as exc:
        rows.append(f"error,,,NoSolution,{exc}")
        code = EXIT_NO_SOLUTION
    else:
        ok = verify(sol, u_l, u_r, g=args.g).ok
        tag = sol.case_tag.value
        rows.append(f"trace_in,{_g(sol.trace_in.h)},{_g(sol.trace_in.q)},{tag},{ok}")
        rows.append(f"trace_out,{_g(sol.trace_out.h)},{_g(sol.trace_out.q)},{tag},{ok}")
        for c in sol.candidates:
            rows.append(f"candidate_in,{_g(c.trace_in.h)},{_g(c.trace_in.q)},{c.label},{c.admissible}")
            rows.append(f"candidate_out,{_g(c.trace_out.h)},{_g(c.trace_out.q)},{c.label},{c.admissible}")
    text = "\n".join(rows) + "\n"
    (out / "junction.csv").write_text(text)
    sys.stdout.write(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="canalflow", description="Shallow-water junction solvers and simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--g", type=float, default=GRAVITY, help="gravitational acceleration")
        p.add_argument("--output-dir", default=None, help=f"output directory (overrides ${OUTPUT_ENV})")

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curves", help="export the ten wave and critical curves of an anchor")
    p.add_argument("--h0", type=float, required=True)
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("regions", help="export half-Riemann region boundaries")
    p.add_argument("--side", choices=("in", "out"), required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("junction", help="solve a junction Riemann problem and export its diagram")
    p.add_argument("--hl", type=float, required=True)
    p.add_argument("--ql", type=float, required=True)
    p.add_argument("--hr", type=float, required=True)
    p.add_argument("--qr", type=float, required=True)
    p.add_argument("--coupling", choices=[c.value for c in Coupling], default=Coupling.EQUAL_HEIGHT.value)
    common(p)
    p.set_defaults(func=cmd_junction)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DryStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
