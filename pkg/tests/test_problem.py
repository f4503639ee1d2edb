import pytest
from hypothesis import given, strategies as st

from agsynth.errors import ConflictError, SemanticError
from agsynth.problem import (
    StrategyTables,
    Valuation,
    concat,
    enumerate_valuations,
    pack,
    restrict,
    unpack,
    validate_tables,
)


@st.composite
def valuations(draw, names=("a", "b", "c", "d")):
    chosen = draw(st.lists(st.sampled_from(names), unique=True, max_size=len(names)))
    widths = {n: draw(st.integers(1, 4)) for n in chosen}
    values = {n: draw(st.integers(0, (1 << w) - 1)) for n, w in widths.items()}
    return Valuation(values, widths)


def test_valuation_range_checks():
    with pytest.raises(ValueError):
        Valuation({"a": 4}, {"a": 2})
    with pytest.raises(ValueError):
        Valuation({}, {"a": 1})
    with pytest.raises(ValueError):
        Valuation({"a": 0, "b": 0}, {"a": 1})


def test_bit_access():
    v = Valuation({"a": 5}, {"a": 3})
    assert [v.bit("a", i) for i in range(3)] == [True, False, True]
    with pytest.raises(IndexError):
        v.bit("a", 3)


@given(valuations())
def test_restrict_to_everything_is_identity(v):
    assert restrict(v, list(v)) == v


@given(valuations(), st.data())
def test_restrict_then_concat_recovers(v, data):
    names = list(v)
    left = data.draw(st.lists(st.sampled_from(names), unique=True)) if names else []
    right = [n for n in names if n not in left]
    assert concat(restrict(v, left), restrict(v, right)) == v


@given(valuations(), valuations(names=("c", "d", "e")))
def test_concat_is_consistent(u, w):
    shared = set(u) & set(w)
    if any(u[k] != w[k] or u.widths[k] != w.widths[k] for k in shared):
        with pytest.raises(ConflictError):
            concat(u, w)
    else:
        c = concat(u, w)
        assert restrict(c, list(u)) == u
        assert restrict(c, list(w)) == w


def test_restrict_outside_domain():
    with pytest.raises(KeyError):
        restrict(Valuation({"a": 1}, {"a": 1}), ["b"])


@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
def test_pack_unpack_roundtrip(widths, data):
    values = [data.draw(st.integers(0, (1 << w) - 1)) for w in widths]
    x = pack(values, widths)
    assert 0 <= x < 1 << sum(widths)
    assert unpack(x, widths) == values


def test_enumeration_order_is_msb_first():
    vs = enumerate_valuations([("hi", 1), ("lo", 2)])
    assert len(vs) == 8
    assert [pack([v["hi"], v["lo"]], [1, 2]) for v in vs] == list(range(8))


def test_tables_replace_and_lookup():
    t = StrategyTables.of({"h": [0, 1]}, bound=1, mode="coop")
    u = t.replace(h=[1, 1])
    assert t["h"] == (0, 1) and u["h"] == (1, 1)
    assert u.bound == 1 and u.mode == "coop"
    assert "h" in t and "g" not in t
    with pytest.raises(KeyError):
        t["g"]


def test_validate_tables(peterson, peterson_tables):
    validate_tables(peterson, peterson_tables)
    with pytest.raises(SemanticError):
        validate_tables(peterson, peterson_tables.replace(w11=[0, 1]))
    with pytest.raises(SemanticError):
        validate_tables(peterson, peterson_tables.replace(w12=[2]))
