import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canalflow.junction import Coupling
from canalflow.scenario import (
    EXIT_DRY,
    EXIT_NO_SOLUTION,
    EXIT_OK,
    SNAPSHOT_HEADER,
    CanalSpec,
    RunReport,
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    load_scenario,
    parse_scenario,
    render,
    run,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

TEST1 = """
[scenario]
t_end = 0.02
output_interval = 0.01

[junction]
coupling = equal_height

[canal1]
length = 1.0
cells = 20
h = 0.25
q = 0.025

[canal2]
length = 1.0
cells = 20
h = 2.5
q = 0.25
"""


def with_line(text, section, line):
    return text.replace(f"[{section}]\n", f"[{section}]\n{line}\n", 1)


def test_parse_test1_config():
    s = parse_scenario(TEST1)
    assert s.canal1 == CanalSpec(1.0, 20, (0.25,), (0.025,))
    assert s.canal2.h == (2.5,) and s.canal2.q == (0.25,)
    assert s.coupling is Coupling.EQUAL_HEIGHT
    assert s.gravity == 9.81
    assert parse_scenario(render(s)) == s


def test_shipped_scenarios_load():
    for path in sorted(SCENARIOS.glob("*.ini")):
        s = load_scenario(path)
        assert parse_scenario(render(s)) == s


positive = st.floats(1e-3, 1e3, allow_nan=False)
finite = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def canal(draw, name):
    length = draw(positive)
    n = draw(st.integers(0, 3))
    lo, hi = (-length, 0.0) if name == "canal1" else (0.0, length)
    fracs = sorted(set(draw(st.lists(st.floats(0.05, 0.95), min_size=n, max_size=n))))
    breaks = tuple(lo + f * (hi - lo) for f in fracs)
    breaks = tuple(b for b in breaks if lo < b < hi)
    k = len(breaks) + 1
    h = tuple(draw(st.lists(positive, min_size=k, max_size=k)))
    q = tuple(draw(st.lists(finite, min_size=k, max_size=k)))
    return CanalSpec(length, draw(st.integers(4, 1000)), h, q, breaks)


@st.composite
def scenarios(draw):
    return Scenario(
        draw(canal("canal1")),
        draw(canal("canal2")),
        gravity=draw(positive),
        coupling=draw(st.sampled_from(list(Coupling))),
        cfl=draw(st.floats(1e-3, 1.0)),
        t_end=draw(st.floats(0.0, 10.0)),
        output_interval=draw(positive),
        limiter=draw(st.booleans()),
        tvb_m=draw(st.floats(0.0, 100.0)),
        degree=draw(st.sampled_from([0, 1, 2])),
        output_dir=draw(st.sampled_from(["output", "out/run_1"])),
    )


@settings(max_examples=200, deadline=None)
@given(scenarios())
def test_render_round_trip(s):
    assert parse_scenario(render(s)) == s


def test_missing_gravity_defaults_in_report(tmp_path):
    report = run(parse_scenario(TEST1), tmp_path)
    assert report.gravity == 9.81
    assert json.loads((tmp_path / "report.json").read_text())["gravity"] == 9.81


def test_negative_depth_names_field():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(TEST1.replace("h = 0.25", "h = -1"))
    assert exc.value.field == "canal1.h"
    assert "canal1.h" in str(exc.value)


@pytest.mark.parametrize(
    "section, line, field",
    [
        ("scenario", "cfl = 2", "scenario.cfl"),
        ("scenario", "tvb_m = -1", "scenario.tvb_m"),
        ("scenario", "degree = 3", "scenario.degree"),
        ("scenario", "limiter = maybe", "scenario.limiter"),
        ("scenario", "colour = red", "scenario.colour"),
        ("scenario", "gravity = 0", "scenario.gravity"),
        ("junction", "weir = 1", "junction.weir"),
        ("canal2", "breaks = 0.5", "canal2.h"),
    ],
)
def test_validation_errors_name_field(section, line, field):
    text = with_line(TEST1, section, line)
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.field == field


@pytest.mark.parametrize(
    "old, new, field",
    [
        ("t_end = 0.02", "t_end = -1", "scenario.t_end"),
        ("coupling = equal_height", "coupling = weir", "junction.coupling"),
        ("length = 1.0", "length = nan", "canal1.length"),
    ],
)
def test_replaced_values_name_field(old, new, field):
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(TEST1.replace(old, new, 1))
    assert exc.value.field == field


def test_cells_must_be_integer():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(TEST1.replace("cells = 20\nh = 2.5", "cells = 2.5\nh = 2.5"))
    assert exc.value.field == "canal2.cells"


def test_parse_error_has_line_number():
    text = "[canal1]\nlength = 1\nthis line is junk\n"
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario(text)
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_key_before_section_is_parse_error():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario("gravity = 9.81\n" + TEST1)
    assert exc.value.line == 1


def test_piecewise_profile(tmp_path):
    text = TEST1.replace("h = 0.25\nq = 0.025", "h = 0.25, 0.5\nq = 0.025, 0.0\nbreaks = -0.5")
    text = text.replace("t_end = 0.02", "t_end = 0")
    report = run(parse_scenario(text), tmp_path)
    rows = (tmp_path / report.snapshots[0]["files"][0]).read_text().splitlines()[1:]
    h = np.array([float(r.split(",")[1]) for r in rows])
    assert np.all(h[:10] == 0.25) and np.all(h[10:] == 0.5)


def test_t_end_zero_echoes_initial_condition(tmp_path):
    report = run(parse_scenario(TEST1.replace("t_end = 0.02", "t_end = 0")), tmp_path)
    assert report.status == "completed" and report.steps == 0
    assert len(report.snapshots) == 1
    assert report.case_history[0]["case_tag"] == "AA_CriticalRight"
    for name, (h, q) in zip(report.snapshots[0]["files"], [(0.25, 0.025), (2.5, 0.25)]):
        lines = (tmp_path / name).read_text().splitlines()
        assert lines[0] == SNAPSHOT_HEADER
        for row in lines[1:]:
            cols = row.split(",")
            assert float(cols[1]) == h and float(cols[2]) == q
            assert cols[5] == "fluvial"


def test_snapshots_are_deterministic(tmp_path):
    s = parse_scenario(TEST1)
    a, b = tmp_path / "a", tmp_path / "b"
    ra, rb = run(s, a), run(s, b)
    assert [x["files"] for x in ra.snapshots] == [x["files"] for x in rb.snapshots]
    for snap in ra.snapshots:
        for name in snap["files"]:
            assert (a / name).read_bytes() == (b / name).read_bytes()


def test_snapshot_times_and_full_precision(tmp_path):
    report = run(parse_scenario(TEST1), tmp_path)
    assert [s["t"] for s in report.snapshots] == pytest.approx([0.0, 0.01, 0.02], abs=1e-15)
    assert report.t_final == 0.02
    row = (tmp_path / report.snapshots[-1]["files"][0]).read_text().splitlines()[5]
    assert any(len(c.replace("-", "").replace(".", "").split("e")[0]) >= 15 for c in row.split(",")[1:5])


def test_ledger_matches_reintegrated_snapshots(tmp_path):
    report = run(parse_scenario(TEST1), tmp_path)
    cfg = parse_scenario(TEST1)
    for snap, entry in zip(report.snapshots, report.ledger):
        vol = 0.0
        for name, spec in zip(snap["files"], (cfg.canal1, cfg.canal2)):
            rows = (tmp_path / name).read_text().splitlines()[1:]
            vol += sum(float(r.split(",")[1]) for r in rows) * spec.length / spec.cells
        assert abs(vol - entry["volume"]) < 1e-12
        assert abs(entry["drift"]) < 1e-12


def test_completed_run_has_case_history(tmp_path):
    report = run(parse_scenario(TEST1), tmp_path)
    assert report.exit_code == EXIT_OK
    assert report.case_history and report.case_history[0]["case_tag"] == "AA_CriticalRight"
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["status"] == "completed"
    assert data["case_history"] == report.case_history


def test_unsupported_regimes_warn_and_run(tmp_path):
    text = TEST1.replace("h = 2.5\nq = 0.25", "h = 0.2\nq = -3.0")
    with pytest.warns(UserWarning, match="outside the analysed cases"):
        report = run(parse_scenario(text), tmp_path)
    assert report.warnings


def test_no_solution_status(tmp_path):
    # Torrential pair whose depths admit no common trace under equal heights.
    text = TEST1.replace("h = 0.25\nq = 0.025", "h = 1.6713013786355257\nq = 8.138636575542469").replace(
        "h = 2.5\nq = 0.25", "h = 3.7798898879402927\nq = 109.8295582802996"
    )
    report = run(parse_scenario(text), tmp_path)
    assert report.status == "no_solution"
    assert report.exit_code == EXIT_NO_SOLUTION
    assert set(report.failure) >= {"t", "U_l", "U_r", "regimes", "reason"}


def test_exit_codes():
    assert RunReport(status="dry").exit_code == EXIT_DRY
    assert RunReport().exit_code == EXIT_OK
