import json
import subprocess
import sys

import pytest

from frobenius_lie.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def heis(tmp_path, capsys):
    path = tmp_path / "heis.json"
    assert main(["generate", '{"family": "heisenberg"}', "-o", str(path)]) == 0
    return str(path)


@pytest.fixture
def ut(tmp_path):
    path = tmp_path / "ut.json"
    assert main(["generate", "--group", '{"family": "ut37"}', "-o", str(path)]) == 0
    return str(path)


def _records(text):
    rep = json.loads(text)
    ids = [r["check_id"] for r in rep["records"]]
    assert ids == sorted(ids) and len(ids) == len(set(ids))
    for r in rep["records"]:
        assert set(r) == {"check_id", "status", "numerics", "caps_used", "paper_bound"}
        assert r["status"] in ("pass", "fail", "inconclusive")
    return {r["check_id"]: r for r in rep["records"]}


def test_validate_all_pass(capsys, heis):
    code, out, _ = run(capsys, "validate", heis)
    recs = _records(out)
    assert code == 0 and all(r["status"] == "pass" for r in recs.values())
    assert "lie.jacobi" in recs and "format.round_trip" in recs


def test_validate_flags_broken_instance(capsys, heis, tmp_path):
    d = json.load(open(heis))
    d["brackets"].append({"i": 0, "j": 2, "entries": [{"k": 1, "c": [1]}]})
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run(capsys, "validate", str(bad))
    recs = _records(out)
    assert code == 1
    assert recs["action.automorphism"]["status"] == "fail"


def test_tower_report(capsys, heis):
    code, out, _ = run(capsys, "tower", heis, "--levels", "1", "--weightcap", "2")
    recs = _records(out)
    assert code == 0
    assert recs["tower.centralizer_property"]["status"] == "pass"
    z = recs["Z.class"]
    assert z["numerics"]["class_Z"] <= 2 and z["caps_used"] == {"U_used": 2, "T_used": 1}
    assert z["paper_bound"]["U"] == 6175


def test_universal_report(capsys):
    code, out, _ = run(capsys, "universal", "--n", "3", "--q", "2", "--r", "2", "--c", "1",
                       "--orbits", "1", "--maxweight", "10")
    recs = _records(out)
    assert code == 0
    f = recs["universal.empirical_f"]
    assert f["numerics"]["empirical_f"] == 1 and f["numerics"]["stabilized"] is True


def test_universal_truncated_is_inconclusive_not_failure(capsys):
    code, out, _ = run(capsys, "universal", "--n", "5", "--q", "4", "--r", "2", "--maxweight", "2")
    assert code == 0
    assert _records(out)["universal.empirical_f"]["status"] == "inconclusive"


def test_kms_report(capsys):
    code, out, _ = run(capsys, "kms", "--n", "7", "--q", "3", "--r", "2", "--indices", "4,2,5",
                       "--word", "0,3,6", "--p", "29")
    recs = _records(out)
    assert code == 0 and recs["kms.000"]["numerics"]["terms"]


def test_group_report(capsys, ut):
    code, out, _ = run(capsys, "group", ut, "--levels", "2", "--weightcap", "2")
    recs = _records(out)
    assert code == 0
    assert recs["bridge.fixed_points"]["numerics"] == {"C_L_phi": 7, "C_G_phi": 7}
    assert recs["bridge.A_tower.parameter_decrease"]["numerics"]["param_G"] == [7, [1, 7], 14]
    assert recs["fitting.fitting_normal"]["numerics"] == {"index": 1, "m": 7, "n": 3, "violations": []}


def test_determinism(capsys, heis):
    a = run(capsys, "tower", heis, "--levels", "1", "--weightcap", "3")[1]
    b = run(capsys, "tower", heis, "--levels", "1", "--weightcap", "3")[1]
    assert a == b


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "tower", "x.json", "--bogus")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"field": {"p": 7}}')
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "$.frobenius" in err
    assert run(capsys, "universal", "--n", "3", "--q", "2", "--r", "1")[0] == 2
    assert run(capsys, "generate", "not json")[0] == 2


def test_generate_to_stdout_round_trips(capsys):
    code, out, _ = run(capsys, "generate", '{"family": "free-nilpotent", "class_cap": 3, "seed": 4}')
    assert code == 0 and json.loads(out)["family"]["seed"] == 4


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "frobenius_lie", "generate", '{"family": "heisenberg"}'],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["dim"] == 3
