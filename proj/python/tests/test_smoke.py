import math
import pathlib

import pytest

import chainrisk

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"

DIAMOND = {
    "tasks": [
        {"id": 1, "avg": 1},
        {"id": 2, "avg": 5},
        {"id": 3, "avg": 3, "safe": 7, "max": 7},
        {"id": 4, "avg": 1},
    ],
    "arcs": [[1, 2], [1, 3], [2, 4], [3, 4]],
}


def test_load_and_validate_demo():
    p = chainrisk.load_project(str(DATA / "demo_project.json"))
    assert len(p) == 12
    assert p.validate()["errors"] == []
    assert p.cpm_makespan() > 0


def test_patterson_text():
    p = chainrisk.parse_patterson("3 1\n2\n0 0 1 2\n4 2 1 3\n0 0 0\n")
    assert p.task_ids == [1, 2, 3]
    assert p.arcs == [(1, 2), (2, 3)]
    assert p.cpm_makespan() == 4


def test_schedule_diamond():
    p = chainrisk.project_from_json(DIAMOND)
    s = chainrisk.schedule(p)
    assert s["critical_chain"] == [1, 2, 4]
    assert s["feeding_chains"][0]["tasks"] == [3]
    assert s["buffers"]["cpm"]["feeding_buffers"] == [2.0]
    assert s["buffers"]["apd"]["feeding_buffers"] == [4.0]


def test_buffer_formulas():
    assert chainrisk.cut_paste_buffer([(12, 10), (14, 10), (16, 10)]) == 6
    assert chainrisk.rsem_buffer([(13, 10), (14, 10)]) == 5
    assert math.isclose(chainrisk.apd_buffer(4, 3, [4, 4]), 1.75 * math.sqrt(8))


def test_risk_criticality_centre():
    assert abs(chainrisk.risk_criticality(5.5, 5.5, 5.5) - 5.5) < 0.05
    assert chainrisk.ahp_weights([[1, 1, 1], [1, 1, 1], [1, 1, 1]]) == pytest.approx(
        (1 / 3, 1 / 3, 1 / 3)
    )


def test_simulation_analytic_mean():
    p = chainrisk.project_from_json(
        {"tasks": [{"id": 1, "min": 5, "avg": 10, "safe": 20, "max": 20}], "arcs": []}
    )
    reg = "risk_id,description,p,ic,ti,iq,d,rf:1\nR1,x,5,5,5,5,5,1\n"
    r = chainrisk.simulate(p, reg, replications=50000, seed=3, workers=2)
    assert abs(r["mean"] - 12.5) / 12.5 < 0.005
    again = chainrisk.simulate(p, reg, replications=50000, seed=3, workers=1)
    assert again["makespans"] == r["makespans"]


def test_mitigation():
    doc = {
        "fault_tree": {
            "gate": "OR",
            "name": "top",
            "children": [{"event": "a", "p": 0.1}, {"event": "b", "p": 0.2}],
        },
        "event_tree": {"initiating_probability": 1.0, "strategies": [{"name": "s", "failure": 0.2}]},
    }
    r = chainrisk.mitigation(doc)
    assert math.isclose(r["top_event_probability"], 0.28)
    assert r["ranked_root_causes"][0][0] == "b"
    assert [sig for sig, _ in r["path_table"]] == ["S", "F"]


def test_errors_carry_codes():
    with pytest.raises(chainrisk.ChainriskError) as info:
        chainrisk.load_project("/nonexistent/x.rcp")
    assert info.value.code == "IO"
    with pytest.raises(ValueError):
        chainrisk.parse_patterson("2 0\n0 x 1 2\n0 0 0\n")
