import json
import subprocess
import sys

import pytest

from divchoice.cli import main
from divchoice.io import fixture_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ex2_file(tmp_path):
    p = tmp_path / "ex2.json"
    p.write_text(fixture_text("example2"))
    return str(p)


def test_repro_example1(capsys):
    code, out, _ = run(capsys, "repro", "example1")
    assert code == 0 and "stable set empty" in out
    assert "3 has justified envy toward 1" in out


def test_repro_example2(capsys):
    code, out, _ = run(capsys, "repro", "example2")
    assert code == 0
    assert "φ̄ = {s:{2,3}, s′:{4}}" in out
    assert "{s:{3,4}, s′:{2}}: stable=true, pareto_dominates_phi=true" in out


def test_repro_example3(capsys):
    code, out, _ = run(capsys, "repro", "example3")
    assert code == 0 and out.count(" ok") == 4


def test_repro_slot_scenario_writes_csv_and_png(capsys, tmp_path):
    code, out, _ = run(capsys, "repro", "appendixE", "--out", str(tmp_path))
    assert code == 0
    assert "0 of 518400 slot-priority pairs satisfy all six cases" in out
    assert (tmp_path / "appendixE_cases.csv").read_text().startswith("cases_satisfied,pairs\n0,")
    assert (tmp_path / "appendixE_cases.png").read_bytes()[:4] == b"\x89PNG"


def test_match_is_deterministic(capsys, ex2_file):
    code, first, _ = run(capsys, "match", ex2_file, "--trace", "--seed", "7")
    _, second, _ = run(capsys, "match", ex2_file, "--trace", "--seed", "7")
    assert code == 0 and first == second
    d = json.loads(first)
    assert d["matching"] == {"1": None, "2": "5", "3": "5", "4": "6"}
    assert d["trace"] and "timing" not in d


def test_match_refuses_axiom_failure(capsys, tmp_path):
    p = tmp_path / "ex1.json"
    p.write_text(fixture_text("example1"))
    code, out, err = run(capsys, "match", str(p))
    assert code == 1 and "DC" in err
    assert json.loads(out)["verdicts"] == {"axioms": False}


def test_check_rule(capsys, ex2_file):
    code, out, _ = run(capsys, "check-rule", ex2_file, "--json")
    assert code == 0 and all(json.loads(out)["verdicts"].values())


def test_verify_and_enumerate(capsys, ex2_file, tmp_path):
    m = tmp_path / "m.json"
    m.write_text('{"2": "6", "3": "5", "4": "5"}')
    code, out, _ = run(capsys, "verify", ex2_file, str(m))
    assert code == 0 and "stable: true" in out
    m.write_text('{"1": "6", "3": "5", "4": "5"}')
    code, out, _ = run(capsys, "verify", ex2_file, str(m))
    assert code == 1 and "2 has justified envy toward 1 at 6" in out
    code, out, _ = run(capsys, "enumerate-stable", ex2_file)
    assert code == 0 and "{5:{3,4}, 6:{2}}  [student-optimal]" in out


def test_audit_sp(capsys, ex2_file):
    code, out, _ = run(capsys, "audit-sp", ex2_file, "--group", "2")
    assert code == 0 and "pass" in out


def test_bench_writes_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--sizes", "8", "16", "--reps", "1", "--out", str(tmp_path))
    assert code == 0 and "informational" in out
    assert (tmp_path / "bench.csv").read_text().count("\n") == 3
    assert (tmp_path / "bench.png").exists()


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, _, err = run(capsys, "match", str(bad))
    assert code == 2 and "line 1, column 2" in err
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2
    big = json.loads(fixture_text("example2"))
    big["students"] += [{"id": str(k), "type": "A"} for k in range(10, 16)]
    for sc in big["schools"]:
        sc["rule"] = {"adjusted_scoring": {"alpha": {"A": [0, 0, 0], "B": [0, 0, 0]}, "sigma_floor": 0}}
    for st in big["students"]:
        st["score"] = "0.5"
    p = tmp_path / "big.json"
    p.write_text(json.dumps(big))
    assert run(capsys, "enumerate-stable", str(p))[0] == 3


def test_module_entry_point(ex2_file):
    r = subprocess.run([sys.executable, "-m", "divchoice", "match", ex2_file], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["command"] == "match"
