"""Scenario files, simulation driving and run reports.

A scenario is an INI-style text::

    [scenario]
    gravity = 9.81
    t_end = 0.1
    output_interval = 0.02

    [junction]
    coupling = equal_height

    [canal1]
    length = 1.0
    cells = 200
    h = 0.25
    q = 0.025

    [canal2]
    ...

``h`` and ``q`` accept comma-separated values together with ``breaks``
(positions on the canal, increasing) for piecewise-constant data.
Canal 1 occupies ``[-length, 0]`` and canal 2 ``[0, length]``.
"""

from __future__ import annotations

import configparser
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dg import CanalGrid, DGField, project_initial
from .junction import Coupling, regime_pair
from .halfriemann import Case
from .network import JunctionFailure, NetworkSim
from .state import GRAVITY, DryStateError, State, classify

EXIT_OK = 0
EXIT_NO_SOLUTION = 2
EXIT_DRY = 3
EXIT_CONFIG = 4


class ScenarioError(ValueError):
    pass


class ScenarioParseError(ScenarioError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ScenarioValidationError(ScenarioError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class CanalSpec:
    length: float
    cells: int
    h: tuple[float, ...]
    q: tuple[float, ...]
    breaks: tuple[float, ...] = ()

    def states(self) -> list[State]:
        return [State(h, q) for h, q in zip(self.h, self.q)]


@dataclass(frozen=True)
class Scenario:
    canal1: CanalSpec
    canal2: CanalSpec
    gravity: float = GRAVITY
    coupling: Coupling = Coupling.EQUAL_HEIGHT
    cfl: float = 0.15
    t_end: float = 1.0
    output_interval: float = 0.1
    limiter: bool = True
    tvb_m: float = 0.0
    degree: int = 2
    output_dir: str = "output"

    def junction_states(self) -> tuple[State, State]:
        """Initial states adjacent to the junction."""
        return self.canal1.states()[-1], self.canal2.states()[0]


_SCENARIO_KEYS = {"gravity", "cfl", "t_end", "output_interval", "limiter", "tvb_m", "degree", "output_dir"}
_CANAL_KEYS = {"length", "cells", "h", "q", "breaks"}
_SECTIONS = {"scenario", "junction", "canal1", "canal2"}


def _float(section, key, raw) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ScenarioValidationError(f"{section}.{key}", f"not a number: {raw!r}") from None
    if not np.isfinite(value):
        raise ScenarioValidationError(f"{section}.{key}", f"not finite: {raw!r}")
    return value


def _floats(section, key, raw) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts and key != "breaks":
        raise ScenarioValidationError(f"{section}.{key}", "empty value")
    return tuple(_float(section, key, p) for p in parts)


def _int(section, key, raw) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioValidationError(f"{section}.{key}", f"not an integer: {raw!r}") from None


def _bool(section, key, raw) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ScenarioValidationError(f"{section}.{key}", f"not a boolean: {raw!r}")


def _canal(name: str, sec) -> CanalSpec:
    for key in ("length", "cells", "h", "q"):
        if key not in sec:
            raise ScenarioValidationError(f"{name}.{key}", "missing")
    length = _float(name, "length", sec["length"])
    if not length > 0.0:
        raise ScenarioValidationError(f"{name}.length", f"must be positive, got {length!r}")
    cells = _int(name, "cells", sec["cells"])
    if cells < 4:
        raise ScenarioValidationError(f"{name}.cells", f"need at least 4 cells, got {cells}")
    h = _floats(name, "h", sec["h"])
    q = _floats(name, "q", sec["q"])
    breaks = _floats(name, "breaks", sec.get("breaks", ""))
    pieces = len(breaks) + 1
    if len(h) != pieces:
        raise ScenarioValidationError(f"{name}.h", f"expected {pieces} value(s), got {len(h)}")
    if len(q) != pieces:
        raise ScenarioValidationError(f"{name}.q", f"expected {pieces} value(s), got {len(q)}")
    for v in h:
        if not v > 0.0:
            raise ScenarioValidationError(f"{name}.h", f"depth must be positive, got {v!r}")
    lo, hi = (-length, 0.0) if name == "canal1" else (0.0, length)
    if list(breaks) != sorted(breaks) or any(not lo < b < hi for b in breaks):
        raise ScenarioValidationError(f"{name}.breaks", f"must increase strictly inside ({lo}, {hi})")
    return CanalSpec(length, cells, h, q, breaks)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario file; defaults fill missing keys."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioParseError("key outside any section", exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ScenarioParseError(exc.message.split(": ", 1)[-1], exc.lineno) from None
    except configparser.ParsingError as exc:
        line, raw = exc.errors[0]
        raise ScenarioParseError(f"cannot parse {raw.strip()!r}", line) from None

    for name in cp.sections():
        if name not in _SECTIONS:
            raise ScenarioValidationError(name, "unknown section")
    for name in ("canal1", "canal2"):
        if name not in cp:
            raise ScenarioValidationError(name, "missing section")
        unknown = set(cp[name]) - _CANAL_KEYS
        if unknown:
            raise ScenarioValidationError(f"{name}.{sorted(unknown)[0]}", "unknown key")

    sc = cp["scenario"] if "scenario" in cp else {}
    unknown = set(sc) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioValidationError(f"scenario.{sorted(unknown)[0]}", "unknown key")
    kwargs: dict = {}
    for key in ("gravity", "cfl", "t_end", "output_interval", "tvb_m"):
        if key in sc:
            kwargs[key] = _float("scenario", key, sc[key])
    if "degree" in sc:
        kwargs["degree"] = _int("scenario", "degree", sc["degree"])
    if "limiter" in sc:
        kwargs["limiter"] = _bool("scenario", "limiter", sc["limiter"])
    if "output_dir" in sc:
        kwargs["output_dir"] = sc["output_dir"].strip()

    if "junction" in cp:
        junc = cp["junction"]
        unknown = set(junc) - {"coupling"}
        if unknown:
            raise ScenarioValidationError(f"junction.{sorted(unknown)[0]}", "unknown key")
        if "coupling" in junc:
            try:
                kwargs["coupling"] = Coupling(junc["coupling"].strip())
            except ValueError:
                choices = ", ".join(c.value for c in Coupling)
                raise ScenarioValidationError("junction.coupling", f"expected one of {choices}") from None

    scenario = Scenario(_canal("canal1", cp["canal1"]), _canal("canal2", cp["canal2"]), **kwargs)
    _validate(scenario)
    return scenario


def _validate(s: Scenario) -> None:
    if not s.gravity > 0.0:
        raise ScenarioValidationError("scenario.gravity", "must be positive")
    if not 0.0 < s.cfl <= 1.0:
        raise ScenarioValidationError("scenario.cfl", "must lie in (0, 1]")
    if s.t_end < 0.0:
        raise ScenarioValidationError("scenario.t_end", "must be non-negative")
    if not s.output_interval > 0.0:
        raise ScenarioValidationError("scenario.output_interval", "must be positive")
    if s.degree not in (0, 1, 2):
        raise ScenarioValidationError("scenario.degree", "must be 0, 1 or 2")
    if s.tvb_m < 0.0:
        raise ScenarioValidationError("scenario.tvb_m", "must be non-negative")


def _fmt_list(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


def render(s: Scenario) -> str:
    """Scenario file text; ``parse_scenario(render(s)) == s``."""
    lines = [
        "[scenario]",
        f"gravity = {s.gravity!r}",
        f"cfl = {s.cfl!r}",
        f"t_end = {s.t_end!r}",
        f"output_interval = {s.output_interval!r}",
        f"limiter = {'true' if s.limiter else 'false'}",
        f"tvb_m = {s.tvb_m!r}",
        f"degree = {s.degree}",
        f"output_dir = {s.output_dir}",
        "",
        "[junction]",
        f"coupling = {s.coupling.value}",
    ]
    for name, c in (("canal1", s.canal1), ("canal2", s.canal2)):
        lines += ["", f"[{name}]", f"length = {c.length!r}", f"cells = {c.cells}",
                  f"h = {_fmt_list(c.h)}", f"q = {_fmt_list(c.q)}"]
        if c.breaks:
            lines.append(f"breaks = {_fmt_list(c.breaks)}")
    return "\n".join(lines) + "\n"


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


# ---------------------------------------------------------------------------
# Running


def _initial_field(spec: CanalSpec, x_left: float, degree: int) -> DGField:
    grid = CanalGrid(spec.length, spec.cells, degree, x_left)
    breaks = np.asarray(spec.breaks)
    h, q = np.asarray(spec.h), np.asarray(spec.q)

    def profile(x):
        idx = np.searchsorted(breaks, x, side="right")
        return h[idx], q[idx]

    return project_initial(profile, grid)


def build_simulation(s: Scenario) -> NetworkSim:
    f1 = _initial_field(s.canal1, -s.canal1.length, s.degree)
    f2 = _initial_field(s.canal2, 0.0, s.degree)
    return NetworkSim(f1, f2, s.coupling, s.cfl, s.limiter, s.tvb_m, s.gravity)


SNAPSHOT_HEADER = "x,h,q,v,froude,regime"


def snapshot_rows(field: DGField, g: float) -> list[str]:
    rows = []
    for x, (h, q) in zip(field.grid.centers, field.coeffs[:, :, 0]):
        v = q / h
        f = v / np.sqrt(g * h)
        regime = classify(State(float(h), float(q)), g=g).value
        rows.append(f"{x:.17g},{h:.17g},{q:.17g},{v:.17g},{f:.17g},{regime}")
    return rows


def write_snapshot(path: Path, field: DGField, g: float) -> None:
    path.write_text("\n".join([SNAPSHOT_HEADER] + snapshot_rows(field, g)) + "\n")


@dataclass
class RunReport:
    status: str = "completed"
    gravity: float = GRAVITY
    coupling: str = Coupling.EQUAL_HEIGHT.value
    t_final: float = 0.0
    steps: int = 0
    snapshots: list[dict] = field(default_factory=list)
    case_history: list[dict] = field(default_factory=list)
    ledger: list[dict] = field(default_factory=list)
    failure: Optional[dict] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"completed": EXIT_OK, "no_solution": EXIT_NO_SOLUTION, "dry": EXIT_DRY}[self.status]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _regime_warning(s: Scenario) -> Optional[str]:
    u_l, u_r = s.junction_states()
    pair = regime_pair(u_l, u_r, s.gravity)
    if pair in ((Case.A, Case.A), (Case.B, Case.A), (Case.B, Case.B)):
        return None
    return (
        f"initial junction regimes {pair[0].value}->{pair[1].value} are outside the analysed "
        "cases; the classical Riemann trace is used"
    )


def run(s: Scenario, output_dir: Optional[str] = None) -> RunReport:
    """Simulate ``s``, writing snapshot CSVs and ``report.json`` to the output directory."""
    out = Path(output_dir if output_dir is not None else s.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(gravity=s.gravity, coupling=s.coupling.value)
    msg = _regime_warning(s)
    if msg:
        warnings.warn(msg, stacklevel=2)
        report.warnings.append(msg)

    sim = build_simulation(s)

    def snapshot(t, sim_):
        idx = len(report.snapshots)
        files = []
        for k, f in enumerate(sim_.fields, start=1):
            name = f"snapshot_{idx:04d}_canal{k}.csv"
            write_snapshot(out / name, f, s.gravity)
            files.append(name)
        report.snapshots.append({"index": idx, "t": t, "files": files})
        vol = sim_.total_volume()
        report.ledger.append(
            {
                "index": idx,
                "t": t,
                "volume": vol,
                "boundary_inflow": sim_.boundary_inflow,
                "drift": vol - sim_.initial_volume - sim_.boundary_inflow,
            }
        )

    try:
        if s.t_end == 0.0:
            sol = sim.solve_junction(*_traces(sim))
            sim.case_history.append((0.0, sol.case_tag.value))
            snapshot(0.0, sim)
        else:
            sim.advance(s.t_end, snapshot, s.output_interval)
    except JunctionFailure as exc:
        report.status = "no_solution"
        report.failure = exc.diagnostics()
    except DryStateError as exc:
        report.status = "dry"
        report.failure = {"t": sim.t, "x": exc.x, "reason": str(exc)}
    report.t_final = sim.t
    report.steps = sim.steps
    report.case_history = [{"t": t, "case_tag": tag} for t, tag in sim.case_history]
    (out / "report.json").write_text(report.to_json() + "\n")
    return report


def _traces(sim: NetworkSim) -> tuple[State, State]:
    a = sim.fields[0].right_traces()[-1]
    b = sim.fields[1].left_traces()[0]
    return State(float(a[0]), float(a[1])), State(float(b[0]), float(b[1]))
