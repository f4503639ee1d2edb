import json

from agsynth.cli import main
from conftest import bench, requires_z3


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["synth"]) == 2
    assert main(["synth", bench("i2c"), "--opt", "5..2"]) == 2
    assert main(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_file_is_an_input_error(capsys):
    assert main(["synth", "/nonexistent.ags"]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_problem_is_an_input_error(tmp_path, capsys):
    f = tmp_path / "bad.ags"
    f.write_text("problem bad\nvar x : bool state p9 init false\n")
    assert main(["synth", str(f)]) == 2
    assert "error" in capsys.readouterr().err


def test_translate(capsys):
    assert main(["translate", "--ltl", "G(a -> F b)"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("states 2")
    assert main(["translate", "--ltl", "G F a", "--dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph")
    assert main(["translate", "--ltl", "G ("]) == 2


@requires_z3
def test_synth_and_check(tmp_path, capsys):
    out = tmp_path / "sol.json"
    assert main(["synth", bench("peterson"), "--max-memory", "0", "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "w11: c11 := turn & flag2" in text
    data = json.loads(out.read_text())
    assert data["bound"] == 0 and data["mode"] == "ags"
    assert main(["check", bench("peterson"), str(out)]) == 0
    assert capsys.readouterr().out.count("holds") == 3


def test_check_reports_violation(tmp_path, capsys):
    sol = {"mode": "ags", "bound": 0, "holes": {
        "w11": {"table": [0, 0, 0, 0]}, "w12": {"table": [0]},
        "w21": {"table": [0, 1, 0, 0]}, "w22": {"table": [0]}}}
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(sol))
    assert main(["check", bench("peterson"), str(f)]) == 1
    out = capsys.readouterr().out
    assert "VIOLATED" in out and "counterexample" in out


def test_unrealizable_exit_code(capsys):
    code = main(["synth", bench("peterson"), "--mode", "comp", "--max-memory", "0", "--backend", "enumerative"])
    assert code == 1
    assert "unrealizable up to memory bound 0" in capsys.readouterr().err


def test_inconclusive_exit_code(tmp_path):
    slow = tmp_path / "slow"
    slow.write_text("#!/bin/sh\nsleep 5\n")
    slow.chmod(0o755)
    args = ["synth", bench("peterson"), "--max-memory", "0", "--solver", str(slow), "--timeout", "0.3",
            "-o", str(tmp_path / "x.json")]
    assert main(args) == 3


def test_solver_env_override(tmp_path, monkeypatch):
    fake = tmp_path / "fake"
    fake.write_text("#!/bin/sh\ncat > /dev/null\necho unsat\n")
    fake.chmod(0o755)
    monkeypatch.setenv("AGSYNTH_SOLVER", str(fake))
    assert main(["synth", bench("peterson"), "--max-memory", "0", "-o", str(tmp_path / "x.json")]) == 1


@requires_z3
def test_keep_smt(tmp_path):
    d = tmp_path / "smt"
    assert main(["synth", bench("peterson"), "--max-memory", "0", "--keep-smt", str(d),
                 "-o", str(tmp_path / "s.json")]) == 0
    assert (d / "peterson.ags.b0.smt2").exists()


def test_enumerate(capsys):
    assert main(["enumerate", bench("peterson"), "--show", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "4 of 1024 candidate table combinations are ags solutions at bound 0"
    assert json.loads(out[1])["w11"] == {"c11": "turn & flag2"}
    assert main(["enumerate", bench("peterson"), "--mode", "comp"]) == 1
