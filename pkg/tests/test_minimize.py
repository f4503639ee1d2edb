import itertools

import pytest
from hypothesis import given, settings, strategies as st

from agsynth.minimize import (
    bit_names,
    evaluate_sop,
    minimize_expression,
    output_bit_tables,
    prime_implicants,
)

NAMES = ["a", "b", "c", "d", "e", "f"]


def _all_implicants(n):
    for digits in itertools.product((0, 1, 2), repeat=n):
        v = m = 0
        for d in digits:
            v, m = v << 1, m << 1
            if d == 2:
                m |= 1
            else:
                v |= d
        yield v, m


def _brute_minimum(table, n):
    """Smallest (terms, literals) over all implicant covers, by exhaustion."""
    ones = {r for r, x in enumerate(table) if x}
    imps = [(v, m) for v, m in _all_implicants(n)
            if all(table[r] for r in range(1 << n) if r & ~m == v)]
    for k in range(1, len(ones) + 1):
        best = None
        for combo in itertools.combinations(imps, k):
            covered = {r for r in ones for v, m in combo if r & ~m == v}
            if covered == ones:
                lits = sum(n - bin(m).count("1") for _, m in combo)
                best = lits if best is None else min(best, lits)
        if best is not None:
            return k, best
    return 0, 0


def _shape(text):
    if text in ("true", "false"):
        return (0, 0) if text == "false" else (1, 0)
    prods = text.split(" | ")
    return len(prods), sum(len(p.strip("()").split(" & ")) for p in prods)


@pytest.mark.parametrize("table, names, expected", [
    ([0, 0, 0, 1], ["turn", "flag2"], "turn & flag2"),
    ([0, 1, 0, 0], ["turn", "flag1"], "!turn & flag1"),
    ([1, 1, 1, 1], ["a", "b"], "true"),
    ([0, 0], ["a"], "false"),
    ([0, 1, 1, 0], ["a", "b"], "(!a & b) | (a & !b)"),
    ([1, 1, 0, 1], ["a", "b"], "!a | b"),
])
def test_known_minimal_forms(table, names, expected):
    assert minimize_expression(table, names) == expected


def test_primes_of_xor_are_the_minterms():
    assert sorted(prime_implicants([1, 2], 2)) == [(1, 0), (2, 0)]


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n))))
def test_fidelity(arg):
    n, table = arg
    names = NAMES[:n]
    text = minimize_expression(table, names)
    assert [evaluate_sop(text, names, r) for r in range(1 << n)] == [bool(x) for x in table]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n))))
def test_minimality_against_exhaustion(arg):
    n, table = arg
    text = minimize_expression(table, NAMES[:n])
    if any(table) and not all(table):
        assert _shape(text) == _brute_minimum(table, n)


def test_wide_tables_fall_back_to_listing():
    names = [f"x{i}" for i in range(9)]
    table = [0] * 512
    table[5] = 1
    assert minimize_expression(table, names) == "table[" + ",".join(names) + "](5)"


def test_row_count_is_checked():
    with pytest.raises(ValueError):
        minimize_expression([0, 1, 1], ["a", "b"])


def test_bit_names_and_output_split():
    assert bit_names(["pc", "turn"], [2, 1], {"turn"}) == ["pc[1]", "pc[0]", "turn"]
    assert output_bit_tables([0, 1, 2, 3], [2]) == [[0, 0, 1, 1], [0, 1, 0, 1]]
    assert output_bit_tables([0, 3], [1, 1]) == [[0, 1], [0, 1]]
