import json

import pytest

from agsynth.checker import check_solution
from agsynth.dsl import load_problem, parse_problem
from agsynth.driver import (
    RunConfig,
    Solution,
    Unrealizable,
    freeze_holes,
    load_tables,
    make_solution,
    replace_spec,
    resolve_mode,
    save_solution,
    solution_to_json,
    synthesize,
    tables_from_json,
)
from agsynth.encoder import evaluate_cost
from agsynth.errors import SemanticError
from agsynth.ltl import parse_ltl
from agsynth.problem import StrategyTables
from agsynth.smt import SolverConfig
from conftest import bench, requires_z3


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(max_bound=-1)
    with pytest.raises(ValueError):
        RunConfig(opt_range=(3, 2))
    with pytest.raises(ValueError):
        RunConfig(backend="bdd")
    with pytest.raises(ValueError):
        RunConfig(jobs=0)


def test_mode_resolution(peterson):
    assert resolve_mode(peterson, None) == "ags"
    assert resolve_mode(peterson, "cooperative") == "coop"
    with pytest.raises(SemanticError):
        resolve_mode(peterson, "greedy")


def test_solution_json_roundtrip(tmp_path, peterson, peterson_tables):
    s = make_solution(peterson, peterson_tables, check_solution(peterson, peterson_tables, "ags"))
    data = solution_to_json(peterson, s)
    assert data["holes"]["w11"]["expressions"] == {"c11": "turn & flag2"}
    assert data["holes"]["w21"]["expressions"] == {"c21": "!turn & flag1"}
    assert tables_from_json(json.loads(json.dumps(data))) == peterson_tables
    path = tmp_path / "sol.json"
    save_solution(peterson, s, str(path))
    assert load_tables(str(path)) == peterson_tables


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"holes\": 3}")
    with pytest.raises((SemanticError, ValueError)):
        load_tables(str(path))


@pytest.mark.parametrize("backend", [pytest.param("smt", marks=requires_z3), "enumerative"])
def test_synthesize_peterson(peterson, backend):
    s = synthesize(peterson, RunConfig(max_bound=0, backend=backend))
    assert isinstance(s, Solution)
    assert s.bound == 0 and s.report.valid
    assert s.expressions["w11"]["c11"] == "turn & flag2"


def test_unrealizable(peterson):
    r = synthesize(peterson, RunConfig(mode="comp", max_bound=1, backend="enumerative", enum_budget=1 << 20))
    assert isinstance(r, Unrealizable)
    assert r.max_bound == 1 and not r.inconclusive
    assert [a.bound for a in r.attempts] == [0, 1]


def test_inconclusive_when_solver_times_out(tmp_path, peterson):
    slow = tmp_path / "slow"
    slow.write_text("#!/bin/sh\nsleep 5\n")
    slow.chmod(0o755)
    cfg = RunConfig(max_bound=0, solver=SolverConfig(executable=str(slow), timeout=0.3))
    r = synthesize(peterson, cfg)
    assert isinstance(r, Unrealizable) and r.inconclusive


@requires_z3
@pytest.mark.parametrize("search", ["descent", "binary"])
def test_optimization(search):
    p = load_problem(bench("i2c"))
    s = synthesize(p, RunConfig(max_bound=0, opt_range=(1, 8), search=search))
    assert s.cost == 2 == evaluate_cost(p, s.tables)
    assert s.opt == 3
    assert s.report.valid
    if search == "descent":
        assert list(s.opt_trace) == sorted(s.opt_trace, reverse=True)
        assert len(set(s.opt_trace)) == len(s.opt_trace)


@requires_z3
def test_parallel_bounds_pick_the_smallest():
    p = load_problem(bench("peterson_mem"))
    s = synthesize(p, RunConfig(max_bound=1, jobs=2))
    assert s.bound == 1


def test_freeze_holes(peterson, peterson_tables):
    q = freeze_holes(peterson, peterson_tables, 1)
    assert {h.name for h in q.holes} == {"w21", "w22"}
    assert "?w11" not in str(q.processes[0].assignments)
    # the frozen sketch behaves like the original one with P1 fixed
    t2 = peterson_tables.as_dict()
    rest = {k: v for k, v in t2.items() if k in ("w21", "w22")}
    assert check_solution(q, StrategyTables.of(rest), "ags").valid


def test_freeze_rejects_memory():
    p = load_problem(bench("peterson_mem"))
    t = StrategyTables.of({"w11": [0] * 4, "w21": [0] * 4, "mu1": [0] * 16, "mu2": [0] * 16}, bound=1)
    with pytest.raises(SemanticError):
        freeze_holes(p, t, 1)


def test_replace_spec(peterson):
    q = replace_spec(peterson, 2, "G F cr2")
    assert q.specs[1] == parse_ltl("G F cr2")
    assert q.specs[0] == peterson.specs[0]
    with pytest.raises(SemanticError):
        replace_spec(peterson, 1, "G nosuch")


def test_problem_without_holes_is_checked_directly():
    p = parse_problem("""problem plain
var x : bool state p1 init false
trans p1 {
  x' := !x
}
spec p1 "G F x"
""")
    s = synthesize(p, RunConfig(max_bound=0, backend="enumerative"))
    assert isinstance(s, Solution) and s.tables.tables == ()
