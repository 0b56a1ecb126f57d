import json
import math

import pytest

from pgnkit import loads_template
from pgnkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def f21(tmp_path, capsys):
    p = tmp_path / "f21.json"
    assert run(capsys, "template", "build", "--m", "2", "--n", "1", "--k", "0",
               "--horizon", "18", "--out", str(p))[0] == 0
    return p


def test_build_writes_linked_template(f21, tmp_path, capsys):
    lt = loads_template(f21.read_text())
    assert lt.anchors == (0, 3, 9, 18)
    code, out, _ = run(capsys, "template", "build", "--m", "2", "--n", "1", "--k", "1",
                       "--horizon", "30", "--emit-csv", str(tmp_path / "bp.csv"))
    assert code == 0
    assert [a for a in json.loads(out)["anchors"]] == ["0/1", "3/1", "12/1", "30/1"]
    assert (tmp_path / "bp.csv").read_text().startswith("t,")


def test_build_rejects_bad_arguments(capsys):
    assert run(capsys, "template", "build", "--m", "0", "--n", "1", "--horizon", "5")[0] == 2
    assert run(capsys, "template", "build", "--m", "1", "--n", "1", "--k", "-1",
               "--horizon", "5")[0] == 2
    code, _, err = run(capsys, "template", "build", "--m", "1", "--n", "1", "--horizon", "x")
    assert code == 2 and "--horizon" in err
    assert run(capsys, "template", "build")[0] == 2


def test_validate_exit_codes(f21, tmp_path, capsys):
    code, out, _ = run(capsys, "template", "validate", str(f21))
    assert code == 0 and json.loads(out)["valid"] is True
    bad = tmp_path / "bad.json"
    doc = json.loads(f21.read_text())
    doc["values"][1][0] = "5/1"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "template", "validate", str(bad), "--format", "csv")
    assert code == 2
    assert out.splitlines()[0] == "axiom,component,time,interval,detail"
    assert run(capsys, "template", "validate", str(tmp_path / "missing.json"))[0] == 2


def test_score_matches_target(f21, capsys):
    code, out, _ = run(capsys, "score", str(f21), "--T", "3")
    doc = json.loads(out)
    assert code == 0 and doc["average"] == "4/3" and doc["abs_error"] == "0/1"
    code, out, _ = run(capsys, "template", "score", str(f21), "--T", "1")
    assert json.loads(out)["average"] == "0/1"
    code, out, _ = run(capsys, "score", str(f21), "--format", "csv")
    assert out.splitlines()[0] == "t_start,t_end,delta,S_plus"


def test_simulate_rational_point(capsys):
    code, out, _ = run(capsys, "simulate", "--theta", "1/2", "--m", "1", "--n", "1",
                       "--dps", "40", "--t-max", "5", "--dt", "1")
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    assert float(last[0]) == 5 and float(last[3]) == pytest.approx(-5 + math.log(2), abs=1e-12)


def test_simulate_identity_json_and_errors(capsys):
    code, out, _ = run(capsys, "simulate", "--identity", "--m", "2", "--n", "1", "--t-max", "2",
                       "--dt", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["log_lambda"][-1] == pytest.approx([-2, 1, 1], abs=1e-15)
    assert run(capsys, "simulate", "--identity", "--m", "1", "--n", "1", "--dt", "0")[0] == 2
    assert run(capsys, "simulate", "--m", "1", "--n", "1")[0] == 2


def test_seeded_simulation_is_reproducible(tmp_path, capsys):
    args = ["simulate", "--random", "--m", "2", "--n", "2", "--t-max", "3", "--dt", "0.5",
            "--seed", "7"]
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    assert a != run(capsys, *args[:-1], "8")[1]


def test_trace_template_compare_round_trip(tmp_path, capsys):
    tr = tmp_path / "z.csv"
    assert run(capsys, "simulate", "--identity", "--m", "1", "--n", "1", "--t-max", "4",
               "--dt", "0.5", "--out", str(tr))[0] == 0
    tp = tmp_path / "z.json"
    assert run(capsys, "template", "from-trace", str(tr), "--m", "1", "--n", "1",
               "--out", str(tp))[0] == 0
    code, out, _ = run(capsys, "compare", str(tr), str(tp), "--window", "2")
    doc = json.loads(out)
    assert code == 0 and doc["sup_dist"] == 0 and doc["label"] == "finite-horizon diagnostic"
    code, _, err = run(capsys, "compare", str(tr), str(tmp_path / "nope.json"))
    assert code == 2


def test_compare_dimension_mismatch(f21, tmp_path, capsys):
    tr = tmp_path / "z.csv"
    run(capsys, "simulate", "--identity", "--m", "1", "--n", "1", "--t-max", "2", "--dt", "1",
        "--out", str(tr))
    assert run(capsys, "compare", str(tr), str(f21))[0] == 2


def test_occupation_of_cube(capsys):
    code, out, _ = run(capsys, "occupation", "--identity", "--m", "1", "--n", "1", "--T", "50",
                       "--M", "-5", "--dt", "0.01")
    assert code == 0 and json.loads(out)["fraction"] == pytest.approx(0.1, abs=0.01)


def test_lattice_file_input(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"m": 1, "n": 1, "basis": [[1, 0.5], [0, 1]]}))
    code, out, _ = run(capsys, "simulate", "--lattice", str(p), "--t-max", "0", "--dt", "1")
    assert code == 0 and out.splitlines()[1].split(",")[1:3] == ["1", "1"]
    p.write_text(json.dumps({"m": 1, "n": 1, "basis": [[2, 0], [0, 1]]}))
    assert run(capsys, "simulate", "--lattice", str(p), "--t-max", "0")[0] == 2


def test_probe_outputs(capsys):
    code, out, _ = run(capsys, "probe-singular", "--theta", "1/2", "--q-max", "20", "--num", "0",
                       "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "Q,S" and len(rows) == 21
    assert all(float(r.split(",")[1]) == 0 for r in rows[2:])
    code, out, _ = run(capsys, "probe-singular", "--cf", "1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1",
                       "--q-max", "1000")
    assert code == 0 and min(json.loads(out)["S"]) > 0.27
    assert run(capsys, "probe-singular", "--q-max", "10")[0] == 2
    assert run(capsys, "probe-singular", "--cf", "1,x", "--q-max", "10")[0] == 2
    assert run(capsys, "probe-singular", "--cf", "1,0", "--q-max", "10")[0] == 2
