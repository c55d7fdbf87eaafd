import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subdyn import shiftspace as sh
from subdyn.cli import parse_direction, parse_vector, run
from subdyn.errors import InvalidInput
from subdyn.geometry import Direction
from subdyn.spectrum import cat_pair
from subdyn.suspension import perturbed_chain


def report(tmp_path, argv, name="r.json"):
    out = tmp_path / name
    code = run(["--out", str(out)] + argv)
    return code, json.loads(out.read_text())


def test_parse_vectors():
    assert parse_vector("1, -2") == [1, -2]
    assert parse_vector("1,sqrt(2)") == [1, math.sqrt(2)]
    assert parse_vector("(1+sqrt(5))/2") == [(1 + math.sqrt(5)) / 2]
    assert parse_direction("2,4").integer_generator == (1, 2)
    assert not parse_direction("1,sqrt(2)").rational
    with pytest.raises(InvalidInput):
        parse_vector("__import__('os')")


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=4))
def test_integer_vectors_roundtrip(v):
    assert parse_vector(",".join(map(str, v))) == v


def test_report_schema_and_determinism(tmp_path):
    argv = ["shadow", "cat_pair.json", "--direction", "1,0", "--delta", "1e-8", "--length", "2001", "--seed", "7"]
    c1, r1 = report(tmp_path, argv, "a.json")
    c2, r2 = report(tmp_path, argv, "b.json")
    assert c1 == c2 == 0
    for key in ("schema_version", "command", "inputs_digest", "results", "warnings", "versions", "timestamp"):
        assert key in r1
    r1.pop("timestamp"), r2.pop("timestamp")
    r1.pop("argv"), r2.pop("argv")
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    run_ = r1["results"]["runs"][0]
    assert run_["lipschitz_ratio"] <= run_["theoretical_L"]


def test_sweep_reports(tmp_path):
    _, r = report(tmp_path, ["classify", "cat_pair.json", "--sweep", "3600"])
    lines = r["results"]["sweep"]["singular_lines"]
    assert len(lines) == 1 and abs(lines[0]["angle_deg"] - 45) < 1e-6
    assert lines[0]["tag"] == "SecondTypeSingular"
    _, r = report(tmp_path, ["classify", "cat_pair_center.json", "--sweep", "3600"])
    counts = r["results"]["sweep"]["counts"]
    assert counts["Regular"] == 0 and counts["FirstTypeSingular"] == 3600


def test_csv_output(tmp_path):
    out = tmp_path / "s.csv"
    code = run(["--out", str(tmp_path / "r.json"), "--csv", str(out), "shadow", "cat_pair.json",
                "--direction", "1,0", "--length", "50"])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 50 and float(rows[0]["error"]) >= 0


def test_exit_codes(tmp_path):
    assert report(tmp_path, ["spectrum", str(tmp_path / "missing.json")])[0] == 2
    code, r = report(tmp_path, ["shadow", "cat_pair.json", "--direction", "1,1"])
    assert code == 3 and r["results"]["error"]["type"] == "SecondTypeSingular"
    assert run(["no-such-command"]) == 2


def test_rates_failure_exit_code(tmp_path):
    code, r = report(tmp_path, ["sequence", "cat_pair.json", "--direction", "1,sqrt(2)", "--N", "1", "--P", "50"])
    assert code == 0 and not r["results"]["rates"]["passed"]


def test_threads_do_not_change_results(tmp_path, monkeypatch):
    argv = ["shadow", "cat_pair.json", "--direction", "1,0", "--length", "101", "--count", "4"]
    _, r1 = report(tmp_path, argv, "a.json")
    monkeypatch.setenv("SUBDYN_THREADS", "2")
    _, r2 = report(tmp_path, argv, "b.json")
    assert r1["results"] == r2["results"]


def test_irrational_shadow(tmp_path):
    code, r = report(tmp_path, ["shadow", "cat_pair.json", "--direction", "1,sqrt(2)", "--length", "301"])
    assert code == 0 and r["results"]["passed"]


def test_quasi_shadow_command(tmp_path):
    code, r = report(tmp_path, ["quasi-shadow", "cat_pair_center.json", "--direction", "1,0", "--delta", "1e-6"])
    assert code == 0 and r["results"]["passed"]


def test_shift_and_ledrappier(tmp_path):
    g = tmp_path / "g.json"
    rng = np.random.default_rng(0)
    g.write_text(json.dumps(sh.Configuration(2, 24, 2, rng.integers(0, 2, (49, 49))).to_json()))
    code, r = report(tmp_path, ["shift-shadow", str(g), "--R", "12", "--W", "12", "--inner", "0",
                                "--delta", "0.05", "--min-norm", "9", "--count", "3"])
    assert code == 0 and r["results"]["passed"]
    code, r = report(tmp_path, ["ledrappier", "random", "--W", "4", "--seed", "3"])
    assert code == 0 and r["results"]["valid"]
    cfg = tmp_path / "l.json"
    cfg.write_text(json.dumps(r["results"]["configuration"]))
    code, r = report(tmp_path, ["ledrappier", "validate", str(cfg)])
    assert code == 0 and r["results"]["valid"] and r["command"] == "ledrappier validate"


def test_ledrappier_report_as_ground(tmp_path):
    code, _ = report(tmp_path, ["ledrappier", "random", "--W", "24", "--seed", "5"], name="g.json")
    assert code == 0
    code, r = report(tmp_path, ["ledrappier", "validate", str(tmp_path / "g.json")])
    assert code == 0 and r["results"]["valid"] and r["results"]["W"] == 24
    code, r = report(tmp_path, ["shift-shadow", str(tmp_path / "g.json"), "--R", "12", "--W", "12",
                                "--inner", "0", "--delta", "0.05", "--min-norm", "9", "--count", "2"])
    assert code == 0 and r["results"]["passed"]


def test_suspend_shadow(tmp_path):
    ch = perturbed_chain(cat_pair(), Direction.from_integers((1, 0)), [0.3, 0.7], 60, 1e-6, 1.0, seed=1)
    f = tmp_path / "chain.json"
    f.write_text(json.dumps(ch.to_json()))
    code, r = report(tmp_path, ["suspend-shadow", "cat_pair.json", str(f)])
    assert code == 0 and r["results"]["result"]["passed"]
    assert r["results"]["direction"]["integer_generator"] == [1, 0]
