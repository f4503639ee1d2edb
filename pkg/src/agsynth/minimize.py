"""Two-level minimization of hole tables into readable boolean expressions."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

MAX_INPUTS = 8

# An implicant is (value, mask): bits set in ``mask`` are don't-care.
Implicant = tuple[int, int]


def prime_implicants(minterms: Sequence[int], n: int) -> list[Implicant]:
    current = {(m, 0) for m in minterms}
    primes: set[Implicant] = set()
    while current:
        merged: set[Implicant] = set()
        used: set[Implicant] = set()
        groups: dict[int, list[Implicant]] = {}
        for imp in current:
            groups.setdefault(imp[1], []).append(imp)
        for mask, items in groups.items():
            lookup = set(items)
            for v, _ in items:
                for i in range(n):
                    bit = 1 << i
                    if mask & bit or v & bit:
                        continue
                    other = (v | bit, mask)
                    if other in lookup:
                        merged.add((v, mask | bit))
                        used.add((v, mask))
                        used.add(other)
        primes |= current - used
        current = merged
    return sorted(primes)


def _covers(imp: Implicant, m: int) -> bool:
    v, mask = imp
    return (m & ~mask) == v


def _literals(imp: Implicant, n: int) -> int:
    return n - bin(imp[1]).count("1")


def minimum_cover(primes: Sequence[Implicant], minterms: Sequence[int], n: int) -> list[Implicant]:
    """Cheapest set of primes covering ``minterms``: fewest terms, then fewest literals.

    Solved exactly as a 0/1 covering program; the term count is weighted
    above any possible literal total so the objective is lexicographic.
    """
    a = np.array([[1 if _covers(p, m) else 0 for p in primes] for m in minterms], dtype=float)
    big = n * len(primes) + 1
    c = np.array([big + _literals(p, n) for p in primes], dtype=float)
    res = milp(
        c,
        constraints=LinearConstraint(a, lb=np.ones(len(minterms)), ub=np.inf),
        integrality=np.ones(len(primes)),
        bounds=Bounds(0, 1),
    )
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"covering program failed: {res.message}")
    return [p for p, x in zip(primes, res.x) if x > 0.5]


def _literal(name: str, positive: bool) -> str:
    return name if positive else "!" + name


def render_sop(terms: Sequence[Implicant], names: Sequence[str]) -> str:
    n = len(names)
    if not terms:
        return "false"
    parts = []
    for v, mask in terms:
        lits = []
        for k, name in enumerate(names):
            bit = 1 << (n - 1 - k)
            if mask & bit:
                continue
            lits.append(_literal(name, bool(v & bit)))
        if not lits:
            return "true"
        parts.append(" & ".join(lits))
    if len(parts) == 1:
        return parts[0]
    return " | ".join(f"({p})" if " & " in p else p for p in parts)


def evaluate_sop(text: str, names: Sequence[str], row: int) -> bool:
    """Evaluate a rendered sum of products on one row (first name is the MSB)."""
    n = len(names)
    val = {name: bool((row >> (n - 1 - k)) & 1) for k, name in enumerate(names)}
    if text in ("true", "false"):
        return text == "true"
    for prod in text.split(" | "):
        prod = prod.strip("()")
        ok = True
        for lit in prod.split(" & "):
            neg = lit.startswith("!")
            if val[lit.lstrip("!")] == neg:
                ok = False
                break
        if ok:
            return True
    return False


def render_table(table: Sequence[int], names: Sequence[str]) -> str:
    """Fallback rendering: the list of rows where the table is true."""
    ones = [str(r) for r, x in enumerate(table) if x]
    return "table[" + ",".join(names) + "](" + ",".join(ones) + ")"


def minimize_expression(table: Sequence[int], names: Sequence[str]) -> str:
    """Minimal sum of products for a single-bit table.

    Row ``r`` assigns ``names[0]`` the most significant bit of ``r``.  Tables
    over more than eight inputs come back as a raw table listing.
    """
    n = len(names)
    if len(table) != 1 << n:
        raise ValueError(f"table has {len(table)} rows, expected {1 << n}")
    if n > MAX_INPUTS:
        return render_table(table, names)
    ones = [r for r, x in enumerate(table) if x]
    if not ones:
        return "false"
    if len(ones) == len(table):
        return "true"
    primes = prime_implicants(ones, n)
    text = render_sop(minimum_cover(primes, ones, n), names)
    for r in range(len(table)):
        if evaluate_sop(text, names, r) != bool(table[r]):
            raise AssertionError(f"minimized form {text!r} disagrees with its table at row {r}")
    return text


def bit_names(observes: Sequence[str], widths: Sequence[int], bool_names: set[str]) -> list[str]:
    """Single-bit input names, MSB first; boolean names stay bare, others become ``x[i]``."""
    out = []
    for o, w in zip(observes, widths):
        if o in bool_names:
            out.append(o)
        else:
            out.extend(f"{o}[{i}]" for i in reversed(range(w)))
    return out


def output_bit_tables(table: Sequence[int], widths: Sequence[int]) -> list[list[int]]:
    """Split a packed multi-output table into one table per output bit, MSB first."""
    total = sum(widths)
    return [[(x >> (total - 1 - k)) & 1 for x in table] for k in range(total)]


__all__ = [
    "MAX_INPUTS",
    "prime_implicants",
    "minimum_cover",
    "minimize_expression",
    "render_sop",
    "evaluate_sop",
    "bit_names",
    "output_bit_tables",
]
