import stat
import sys

import pytest

from agsynth.dsl import load_problem
from agsynth.encoder import encode_cost, encode_mode, evaluate_cost, max_cost
from agsynth.errors import ExtractionError, SolverError
from agsynth.problem import StrategyTables
from agsynth.smt import (
    LOGIC,
    SOLVER_ENV,
    SolverConfig,
    SolverResult,
    emit_script,
    extract_tables,
    model_values,
    parse_sexprs,
    solve,
)
from conftest import bench, requires_z3


def _fake_solver(tmp_path, body: str) -> str:
    path = tmp_path / "fake_solver"
    path.write_text(f"#!{sys.executable}\nimport sys, time\nsys.stdin.read()\n{body}\n")
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_script_layout(peterson):
    text = emit_script(encode_mode(peterson, 0, "ags"))
    lines = text.splitlines()
    assert lines[0] == "(set-option :produce-models true)"
    assert lines[1] == f"(set-logic {LOGIC})"
    assert any(l.startswith("(declare-fun h_w11 ((_ BitVec 2)) (_ BitVec 1))") for l in lines)
    assert any(l.startswith("(declare-fun h_w12 () (_ BitVec 1))") for l in lines)
    assert lines[-2] == "(check-sat)"
    assert lines[-1].startswith("(get-value (")
    assert text.count("(") == text.count(")")


def test_encoding_records_instances(peterson):
    cs = encode_mode(peterson, 0, "ags")
    assert sorted(cs.meta["stats"]) == ["i", "ii", "iii"]
    coop = encode_mode(peterson, 0, "coop")
    assert sorted(coop.meta["stats"]) == ["iii"]


def test_sexpr_reader():
    assert parse_sexprs("(a (b #b01) |x y|) ; note\n c") == [["a", ["b", "#b01"], "|x y|"], "c"]
    with pytest.raises(ExtractionError):
        parse_sexprs("(a (b)")


def test_model_values_accepts_all_literal_forms():
    r = SolverResult("sat", "(((w11 #b01) #b1) ((w11 (_ bv2 2)) #x1) (w12 false) (w22 (_ bv1 1)))")
    assert model_values(r) == {"(w11 1)": 1, "(w11 2)": 1, "w12": 0, "w22": 1}


def test_extraction_reports_missing_entries(peterson):
    r = SolverResult("sat", "((h_w12 #b0))")
    with pytest.raises(ExtractionError, match="w11"):
        extract_tables(r, peterson, 0)
    with pytest.raises(ExtractionError):
        model_values(SolverResult("unsat"))


def test_result_invariant():
    with pytest.raises(ValueError):
        SolverResult("sat")
    with pytest.raises(ValueError):
        SolverResult("unsat", "()")


def test_solver_resolution(monkeypatch):
    monkeypatch.delenv(SOLVER_ENV, raising=False)
    assert SolverConfig().resolved_executable() == ["z3"]
    monkeypatch.setenv(SOLVER_ENV, "/opt/cvc5 --lang smt2")
    assert SolverConfig().resolved_executable() == ["/opt/cvc5", "--lang", "smt2"]
    assert SolverConfig(executable="/bin/other").resolved_executable() == ["/bin/other"]
    with pytest.raises(ValueError):
        SolverConfig(timeout=0)


def test_missing_solver():
    with pytest.raises(SolverError):
        solve("(check-sat)\n", SolverConfig(executable="/nonexistent/solver"))


def test_timeout_and_crash(tmp_path):
    slow = _fake_solver(tmp_path, "time.sleep(5)")
    r = solve("(check-sat)\n", SolverConfig(executable=slow, timeout=0.5))
    assert r.status == "timeout" and not r.conclusive
    junk = tmp_path / "junk"
    junk.mkdir()
    bad = _fake_solver(junk, "print('(error boom)'); sys.exit(1)")
    r = solve("(check-sat)\n", SolverConfig(executable=bad))
    assert r.status == "crashed" and "boom" in r.detail


def test_artifacts_are_kept(tmp_path):
    fake = _fake_solver(tmp_path, "print('unsat')")
    cfg = SolverConfig(executable=fake, workdir=str(tmp_path / "smt"), keep_artifacts=True)
    r = solve("(check-sat)\n", cfg, artifact="x.ags.b0.smt2")
    assert r.status == "unsat"
    assert (tmp_path / "smt" / "x.ags.b0.smt2").read_text() == "(check-sat)\n"


@requires_z3
def test_peterson_modes(peterson):
    r = solve(emit_script(encode_mode(peterson, 0, "ags")))
    assert r.status == "sat"
    t = extract_tables(r, peterson, 0, "ags")
    assert t["w11"] == (0, 0, 0, 1) and t["w21"] == (0, 1, 0, 0)
    assert solve(emit_script(encode_mode(peterson, 0, "comp"))).status == "unsat"


def test_cost_evaluation():
    p = load_problem(bench("i2c"))
    # one atomic join per process, at the On:=T line of P1 and the final test of P2
    t = StrategyTables.of({"a1": [0, 0, 1, 0], "a2": [0, 0, 1, 0]})
    assert evaluate_cost(p, t) == 2
    assert max_cost(p.at_bound(0), p.costs) == 8


@requires_z3
def test_cost_bound_is_strict():
    p = load_problem(bench("i2c"))
    cs = encode_mode(p, 0, "ags")
    cs.extend(encode_cost(p, 0, p.costs, 3))
    r = solve(emit_script(cs))
    assert r.status == "sat"
    assert evaluate_cost(p, extract_tables(r, p, 0)) < 3
    cs = encode_mode(p, 0, "ags")
    cs.extend(encode_cost(p, 0, p.costs, 2))
    assert solve(emit_script(cs)).status == "unsat"
