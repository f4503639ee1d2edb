import itertools

import pytest
from hypothesis import given, settings, strategies as st

from agsynth.dsl import parse_problem
from agsynth.errors import SemanticError
from agsynth.expr import parse_expr
from agsynth.problem import SCHED, StrategyTables
from agsynth.semantics import eval_expr, signals_of, step
from problem_gen import random_problem


def _globals(m):
    names = list(m.state_names) + list(m.input_names)
    widths = list(m.state_widths) + [v.width for v in m.inputs]
    for combo in itertools.product(*[range(1 << w) for w in widths]):
        yield dict(zip(names, combo))


def _tables(m, rng_bits):
    out = {}
    k = 0
    for h in m.holes:
        out[h.name] = [(rng_bits >> (k + r)) & 1 for r in range(h.rows)]
        k += h.rows
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 1), st.integers(0, 2**32))
def test_frame_law(seed, b, bits):
    """Only the scheduled process changes state; the other one's locals are frozen."""
    p = parse_problem(random_problem(seed))
    m = p.at_bound(b)
    t = StrategyTables.of(_tables(m, bits), bound=b)
    owners = {v.name: v.owner for v in m.state_decls}
    assigned = {i: {v for v, _ in p.processes[i - 1].assignments} for i in (1, 2)}
    for h in m.holes:
        if h.role == "memory":
            assigned[h.owner].add(h.outputs[0])
    for g in _globals(m):
        nxt = step(p, t, g)
        mover = 1 if g[SCHED] else 2
        for name in m.state_names:
            if name not in assigned[mover]:
                assert nxt[name] == g[name], (name, owners[name])


def test_peterson_step(peterson, peterson_tables):
    g = {"turn": 0, "pc1": 2, "pc2": 3, SCHED: 1}
    # w11 = turn & flag2 is false, so P1 leaves its wait loop
    assert step(peterson, peterson_tables, g)["pc1"] == 3
    g = {"turn": 1, "pc1": 2, "pc2": 3, SCHED: 1}
    assert step(peterson, peterson_tables, g)["pc1"] == 2
    g = {"turn": 1, "pc1": 2, "pc2": 3, SCHED: 0}
    out = step(peterson, peterson_tables, g)
    assert out["pc1"] == 2 and out["pc2"] == 4


def test_signals(peterson):
    sig = signals_of(peterson, {"turn": 0, "pc1": 4, "pc2": 5, SCHED: 1, "c11": 0, "c12": 0, "c21": 0, "c22": 0})
    assert sig["cr1"] and sig["flag1"] and not sig["cr2"] and sig["wait2"]
    assert sig["sched_p1"] and not sig["sched_p2"]


def test_eval_expr_with_holes(peterson, peterson_tables):
    e = parse_expr("?w11 & pc1 == 2")
    v = {"turn": 1, "pc1": 2, "pc2": 1}
    assert eval_expr(peterson, e, v, peterson_tables) == 1
    v = {"turn": 0, "pc1": 2, "pc2": 1}
    assert eval_expr(peterson, e, v, peterson_tables) == 0


def test_eval_expr_needs_tables(peterson):
    with pytest.raises(SemanticError):
        eval_expr(peterson, parse_expr("?w11"), {"turn": 1, "pc1": 2, "pc2": 1})


def test_step_needs_inputs(peterson, peterson_tables):
    with pytest.raises(SemanticError):
        step(peterson, peterson_tables, {"turn": 0, "pc1": 0, "pc2": 0})
