import json
import math
import subprocess
import sys

import pytest

from schreier_kit import __version__
from schreier_kit.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, EXIT_WINDOW, run

LINEAR = '[{"from":0,"to":null,"kind":"poly","coeffs":[0,1]}]'


def ok(argv):
    code, rep = run(argv)
    assert code == EXIT_OK, rep
    return rep


def test_member_example_and_report_layout():
    rep = ok(["member", "--family", "schreier:1", "--set", "2,5"])
    assert rep["member"] is True
    keys = list(rep)
    assert keys[-3:] == ["version", "command", "config"]
    assert rep["version"] == __version__ and rep["config"]["set"] == "2,5"


def test_norm_example():
    rep = ok(["norm", "--family", "schreier:1", "--p", "2", "--vector", "[1,1,1]"])
    assert abs(rep["norm"] - math.sqrt(2)) <= 1e-9 and rep["attained"] == [2, 3]
    assert ok(["norm", "--family", "schreier:1", "--p", "2", "--vector", "1,1,1"])["norm"] == rep["norm"]


def test_norm_with_orlicz_base():
    rep = ok(["norm", "--family", "schreier:1", "--vector", "[1,0.6,0.8]", "--orlicz", "example-c"])
    assert rep["norm"] == pytest.approx(1.0, abs=1e-9)


def test_dual_norm_paths():
    a = ok(["dual-norm", "--family", "schreier:1", "--p", "2", "--vector", "[1,1]"])
    assert abs(a["dual_norm"] - 2.0) <= 1e-4 and a["lower"] <= a["upper"]
    b = ok(["dual-norm", "--family", "schreier:1", "--p", "2", "--vector", '{"2":1,"3":1}'])
    assert b["method"] == "member-support" and b["dual_norm"] == math.sqrt(2)


def test_family_and_rank_commands():
    assert ok(["maximal", "--family", "schreier:1", "--upto", "3"])["maximal"] == [[1], [2, 3]]
    sp = ok(["spreading", "--family", "counter", "--bound", "4"])
    assert sp["spreading"] is False and sp["witness"][:2] == [[1, 2], [2, 3]]
    rk = ok(["rank", "--alpha", "1", "--n-max", "6"])
    assert [rk["ranks"][str(n)]["truncated"] for n in range(1, 7)] == [0, 1, 2, 3, 4, 5]
    assert rk["strictly_increasing"]
    assert ok(["rank", "--family", "schreier:1", "--set", "3"])["rank"] == 2


def test_extreme_commands():
    rep = ok(["extreme", "--family", "schreier:1", "--p", "2", "--vector", "[1,1]", "--oracle", "--directions", "200"])
    assert rep["is_extreme"] and rep["oracle"]["verdict"] == "probably extreme" and rep["seed"] == 0
    e1 = ok(["extreme", "--family", "schreier:1", "--p", "2", "--vector", "[1]"])
    assert e1["is_extreme"] is False
    d = ok(["extreme", "--family", "schreier:1", "--p", "2", "--vector", "[0,0.7071067811865476,0.7071067811865476]",
            "--dual"])
    assert d["is_extreme"]


def test_isometry_commands():
    rot = ok(["check-isometry", "--family", "counter", "--rotation", "pi/6", "--dim", "6", "--p", "2",
              "--samples", "500"])
    assert rot["max_deviation"] < 1e-9 and rot["classification"] == "other"
    s1 = ok(["check-isometry", "--family", "schreier:1", "--rotation", "pi/6", "--dim", "6", "--p", "2"])
    assert s1["max_deviation"] > 0.1
    pc = ok(["perm-check", "--family", "schreier:1", "--perm", "2,1,3"])
    assert pc["compatible"] is False and pc["witness"] == [[2, 3], [1, 3]]
    cc = ok(["perm-check", "--family", "counter", "--perm", "2,1,3", "--p", "2"])
    assert cc["compatible"] and cc["isometry_deviation"] <= 1e-12
    st = ok(["star", "--family", "counter", "--j", "1", "--k", "2"])
    assert st["holds"] is False
    mm = ok(["min-max", "--family", "schreier:1", "--k-max", "4"])
    assert mm["table"] == {"1": [1], "2": [2, 3], "3": [3, 4, 5], "4": [4, 5, 6, 7]}


def test_orlicz_command():
    rep = ok(["orlicz", "--function", "example-c", "--eval", "1,0.7071067811865476", "--vector", "[0.7071067811865476,0.7071067811865476]"])
    assert rep["values"][0] == 1.0 and abs(rep["values"][1] - 0.5) <= 1e-12
    assert rep["l2_span"]["is_l2_span"]
    g = ok(["orlicz", "--function", "square", "--growth"])["growth"]
    assert g["doubling_ratio_max"] == pytest.approx(4.0)


def test_properties_command():
    rep = ok(["properties", "--check", "maximal-split", "--alpha", "2"])
    assert rep["ok"] and rep["instances"] == 145


@pytest.mark.parametrize("argv, code, kind", [
    (["member", "--family", "bogus", "--set", "1"], EXIT_INPUT, "invalid-input"),
    (["member", "--family", "schreier:1"], EXIT_INPUT, "invalid-input"),
    (["norm", "--family", "schreier:1", "--p", "0.5", "--vector", "[1]"], EXIT_INPUT, "invalid-input"),
    (["frobnicate"], EXIT_INPUT, "invalid-input"),
    (["member", "--family", "schreier:1", "--set", "2,13"], EXIT_WINDOW, "window-exceeded"),
    (["orlicz", "--function", LINEAR, "--conjugate", "2"], EXIT_NUMERIC, "numeric-failure"),
])
def test_error_exit_codes(argv, code, kind):
    got, rep = run(argv)
    assert got == code and rep["error"]["type"] == kind


def test_window_error_carries_offending_set():
    _, rep = run(["member", "--family", "schreier:1", "--set", "2,13"])
    assert rep["error"]["window"] == 12 and rep["error"]["offending"] == [2, 13]


def test_seeded_commands_are_deterministic():
    argv = ["search-isometry", "--family", "schreier:1", "--p", "3", "--dim", "2", "--restarts", "20", "--seed", "4"]
    assert json.dumps(ok(argv)) == json.dumps(ok(argv))


def test_batch_summary_and_determinism(tmp_path):
    manifest = {"entries": [
        {"name": "m", "criterion": "A", "argv": ["member", "--family", "schreier:1", "--set", "2,5"],
         "expect": [{"path": "member", "equals": True}]},
        {"name": "n", "criterion": "A", "argv": ["norm", "--family", "schreier:1", "--vector", "[1,1,1]"],
         "expect": [{"path": "norm", "approx": math.sqrt(2), "tol": 1e-9}]},
        {"name": "bad", "criterion": "B", "argv": ["norm", "--family", "schreier:1", "--vector", "[1,1,1]"],
         "expect": [{"path": "norm", "lt": 1.0}]},
        {"name": "err", "criterion": "C", "argv": ["member", "--family", "bogus", "--set", "1"]},
        {"name": "nested", "criterion": "C", "argv": ["batch", "x.json"]},
    ]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(manifest))
    code, rep = run(["batch", str(path)])
    assert code == EXIT_OK
    assert rep["summary"] == {"A": "pass", "B": "fail", "C": "fail"}
    assert rep["lines"] == ["A: PASS", "B: FAIL", "C: FAIL"]
    assert rep["errored"] == 2
    assert json.dumps(run(["batch", str(path)])[1]) == json.dumps(rep)


def test_empty_batch():
    code, rep = run(["batch", "[]"])
    assert code == EXIT_OK and rep["entries"] == [] and rep["lines"] == []


def test_main_writes_output_file_and_exit_code(tmp_path):
    out = tmp_path / "r.json"
    p = subprocess.run([sys.executable, "-m", "schreier_kit.cli", "member", "--family", "schreier:1",
                        "--set", "[1,2]", "--output", str(out)], capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(out.read_text())["member"] is False
    q = subprocess.run([sys.executable, "-m", "schreier_kit.cli", "member", "--family", "schreier:1",
                        "--set", "2,13"], capture_output=True, text=True)
    assert q.returncode == EXIT_WINDOW and json.loads(q.stdout)["error"]["type"] == "window-exceeded"


@pytest.mark.slow
def test_acceptance_manifest_passes():
    import pathlib

    manifest = pathlib.Path(__file__).resolve().parent.parent / "manifests" / "acceptance.json"
    code, rep = run(["batch", str(manifest)])
    assert code == EXIT_OK and rep["errored"] == 0
    assert rep["lines"] == [f"{n}: PASS" for n in range(1, 11)]
