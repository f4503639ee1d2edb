import random

import pytest
from hypothesis import given, settings, strategies as st

from agsynth.errors import ParseError, UndeclaredAtomError
from agsynth.ltl import (
    Always,
    And,
    Atom,
    Eventually,
    Lasso,
    Next,
    Not,
    Until,
    eval_ltl_on_lasso,
    parse_ltl,
    render_ltl,
    to_nnf,
)
from problem_gen import random_formula

a, b = Atom("a"), Atom("b")
A = {"a": True, "b": False}
B = {"a": False, "b": True}
N = {"a": False, "b": False}

letters = st.fixed_dictionaries({"a": st.booleans(), "b": st.booleans()})
lassos = st.builds(Lasso, st.lists(letters, max_size=3), st.lists(letters, min_size=1, max_size=3))
formulas = st.builds(lambda seed, d: random_formula(random.Random(seed), ["a", "b"], d),
                     st.integers(0, 10**6), st.integers(0, 3))


def test_parse_precedence():
    assert parse_ltl("a & b | !a") == parse_ltl("(a & b) | (!a)")
    assert parse_ltl("G a -> F b") == parse_ltl("(G a) -> (F b)")
    assert parse_ltl("a U b U a") == Until(a, Until(b, a))


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_ltl("G (a")
    with pytest.raises(ParseError):
        parse_ltl("a &")
    with pytest.raises(UndeclaredAtomError):
        parse_ltl("G c", ["a", "b"])


@pytest.mark.parametrize("text, word, expected", [
    ("a", Lasso([A], [N]), True),
    ("X a", Lasso([A], [N]), False),
    ("F b", Lasso([A, A], [B]), True),
    ("G a", Lasso([A], [A, N]), False),
    ("G F b", Lasso([], [A, B]), True),
    ("F G a", Lasso([B], [A, N]), False),
    ("a U b", Lasso([A, A, B], [N]), True),
    ("a U b", Lasso([A, N, B], [N]), False),
    ("a R b", Lasso([], [B]), True),
    ("G(a -> F b)", Lasso([], [A, N, N]), False),
])
def test_known_values(text, word, expected):
    assert eval_ltl_on_lasso(parse_ltl(text), word) is expected


@given(formulas)
def test_render_parse_roundtrip(f):
    assert parse_ltl(render_ltl(f)) == f


@settings(max_examples=200)
@given(formulas, lassos)
def test_nnf_preserves_meaning(f, w):
    assert eval_ltl_on_lasso(to_nnf(f), w) == eval_ltl_on_lasso(f, w)


@given(formulas, lassos)
def test_negation(f, w):
    assert eval_ltl_on_lasso(Not(f), w) != eval_ltl_on_lasso(f, w)


@given(formulas, lassos)
def test_expansion_laws(f, w):
    # F f = f | X F f and G f = f & X G f
    assert eval_ltl_on_lasso(Eventually(f), w) == (eval_ltl_on_lasso(f, w) or eval_ltl_on_lasso(Next(Eventually(f)), w))
    assert eval_ltl_on_lasso(Always(f), w) == (eval_ltl_on_lasso(f, w) and eval_ltl_on_lasso(Next(Always(f)), w))


@given(formulas, lassos)
def test_unrolling_the_loop_changes_nothing(f, w):
    unrolled = Lasso(list(w.stem) + list(w.loop), list(w.loop) * 2)
    assert eval_ltl_on_lasso(f, unrolled) == eval_ltl_on_lasso(f, w)


def test_depth_and_atoms():
    f = And(Always(a), Next(Until(a, b)))
    assert f.depth() == 3
    assert f.atoms() == {"a", "b"}


def test_lasso_needs_a_loop():
    with pytest.raises(ValueError):
        Lasso([A], [])
