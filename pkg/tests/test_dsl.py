import pytest
from hypothesis import given, settings, strategies as st

from agsynth.dsl import load_problem, parse_problem, render_problem
from agsynth.errors import ParseError, SemanticError
from conftest import bench
from problem_gen import random_problem

NAMES = ["peterson", "peterson_mem", "peterson_read", "p2p", "doublebuf", "i2c"]

MINI = """\
problem mini
mode coop
var x : bool state p1 init false
var y : bool state p2 init true
hole h of p1 outputs c observes x
trans p1 {
  x' := ?h
}
trans p2 {
  y' := !y
}
spec p1 "G F x"
spec p2 "G F y"
"""


@pytest.mark.parametrize("name", NAMES)
def test_benchmarks_load_and_roundtrip(name):
    p = load_problem(bench(name))
    q = parse_problem(render_problem(p))
    assert render_problem(q) == render_problem(p)
    assert q.specs == p.specs
    assert [h.name for h in q.holes] == [h.name for h in p.holes]


def test_mini_structure():
    p = parse_problem(MINI)
    assert p.name == "mini" and p.mode == "coop"
    assert [v.name for v in p.state_vars()] == ["x", "y"]
    assert p.hole("h").owner == 1
    assert "c" in p.controllable()


def test_peterson_hole_signatures(peterson):
    m = peterson.at_bound(0)
    assert m.hole_info["w11"].observes == ("turn", "flag2")
    assert m.hole_info["w11"].rows == 4
    assert m.hole_info["w12"].rows == 1


def test_memory_appears_only_above_bound_zero():
    p = load_problem(bench("peterson_mem"))
    assert {h.name for h in p.at_bound(0).holes} == {"w11", "w21"}
    m1 = p.at_bound(1)
    assert {h.name for h in m1.holes} == {"w11", "w21", "mu1", "mu2"}
    assert m1.hole_info["mu1"].rows == 16


@pytest.mark.parametrize("text, exc", [
    (MINI.replace("x' := ?h", "x' := ?nothole"), SemanticError),
    (MINI.replace("x' := ?h", "q' := ?h"), SemanticError),
    (MINI.replace('"G F x"', '"G F nosuch"'), SemanticError),
    (MINI.replace("observes x", "observes y, x, x"), SemanticError),
    (MINI.replace("x' := ?h", "x' := (?h"), ParseError),
    (MINI.replace("var x : bool", "var x : float"), ParseError),
    (MINI + 'spec p2 "F y"\n', SemanticError),
])
def test_rejects_bad_input(text, exc):
    with pytest.raises(exc):
        parse_problem(text)


def test_observing_foreign_input_is_rejected():
    text = MINI.replace("var y : bool state p2 init true", "var y : bool state p2 init true\nvar i2 : bool input p2")
    text = text.replace("observes x", "observes i2")
    with pytest.raises(SemanticError, match="input"):
        parse_problem(text)


def test_cyclic_signals_are_rejected():
    text = MINI.replace("hole h", "signal s := t\nsignal t := s\nhole h")
    with pytest.raises(SemanticError):
        parse_problem(text)


def test_missing_spec_defaults_to_true():
    p = parse_problem(MINI.replace('spec p2 "G F y"\n', ""))
    assert str(p.specs[1]) == "true"


def test_comments_are_ignored():
    text = "# leading comment\n" + MINI.replace("x' := ?h", "x' := ?h  # trailing")
    assert render_problem(parse_problem(text)) == render_problem(parse_problem(MINI))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_sketches_roundtrip(seed):
    p = parse_problem(random_problem(seed))
    q = parse_problem(render_problem(p))
    assert render_problem(q) == render_problem(p)
    assert q.processes == p.processes
