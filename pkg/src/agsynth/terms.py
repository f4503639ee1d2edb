"""Quantifier-free terms over booleans, bitvectors and uninterpreted functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping


@dataclass(frozen=True)
class FunDecl:
    """Uninterpreted function with bitvector arguments.

    ``result`` is 0 for a boolean result, otherwise a bitvector width.
    ``role`` is ``hole``, ``reach`` (the reachability flag) or ``rank``.
    """

    name: str
    arg_widths: tuple[int, ...]
    result: int
    role: str
    tag: str = ""


@dataclass(frozen=True)
class Term:
    op: str
    args: tuple = ()
    value: int = 0  # constants
    width: int = 0  # 0 means boolean
    fun: FunDecl | None = None

    # sorts: width 0 is boolean
    @property
    def is_bool(self) -> bool:
        return self.width == 0


TRUE_T = Term("const", value=1)
FALSE_T = Term("const", value=0)


def bv(value: int, width: int) -> Term:
    return Term("const", value=value, width=width)


def app(f: FunDecl, *args: int) -> Term:
    """Application of ``f`` to literal arguments."""
    if len(args) != len(f.arg_widths):
        raise ValueError(f"{f.name} expects {len(f.arg_widths)} arguments")
    for a, w in zip(args, f.arg_widths):
        if a < 0 or a >= (1 << w):
            raise ValueError(f"argument {a} out of range for {f.name}")
    return Term("app", tuple(args), width=f.result, fun=f)


def and_(*xs: Term) -> Term:
    flat = []
    for x in xs:
        if x == TRUE_T:
            continue
        if x == FALSE_T:
            return FALSE_T
        if x.op == "and":
            flat.extend(x.args)
        else:
            flat.append(x)
    if not flat:
        return TRUE_T
    if len(flat) == 1:
        return flat[0]
    return Term("and", tuple(flat))


def or_(*xs: Term) -> Term:
    flat = []
    for x in xs:
        if x == FALSE_T:
            continue
        if x == TRUE_T:
            return TRUE_T
        if x.op == "or":
            flat.extend(x.args)
        else:
            flat.append(x)
    if not flat:
        return FALSE_T
    if len(flat) == 1:
        return flat[0]
    return Term("or", tuple(flat))


def not_(x: Term) -> Term:
    if x == TRUE_T:
        return FALSE_T
    if x == FALSE_T:
        return TRUE_T
    return Term("not", (x,))


def implies(a: Term, b: Term) -> Term:
    if a == TRUE_T:
        return b
    if a == FALSE_T or b == TRUE_T:
        return TRUE_T
    return Term("implies", (a, b))


def eq(a: Term, b: Term) -> Term:
    return Term("eq", (a, b))


def uge(a: Term, b: Term) -> Term:
    return Term("uge", (a, b))


def ugt(a: Term, b: Term) -> Term:
    return Term("ugt", (a, b))


def ult(a: Term, b: Term) -> Term:
    return Term("ult", (a, b))


def add(*xs: Term) -> Term:
    w = xs[0].width
    return Term("add", tuple(xs), width=w)


def ite(c: Term, a: Term, b: Term) -> Term:
    return Term("ite", (c, a, b), width=a.width)


def evaluate(t: Term, interp: Mapping[str, Mapping[tuple, int]]) -> int:
    """Evaluate ``t`` given ``interp[fun][args] -> value`` for every application."""
    op = t.op
    if op == "const":
        return t.value
    if op == "app":
        return interp[t.fun.name][t.args]
    if op == "and":
        return int(all(evaluate(a, interp) for a in t.args))
    if op == "or":
        return int(any(evaluate(a, interp) for a in t.args))
    if op == "not":
        return 1 - evaluate(t.args[0], interp)
    if op == "implies":
        return int((not evaluate(t.args[0], interp)) or bool(evaluate(t.args[1], interp)))
    if op == "eq":
        return int(evaluate(t.args[0], interp) == evaluate(t.args[1], interp))
    if op == "uge":
        return int(evaluate(t.args[0], interp) >= evaluate(t.args[1], interp))
    if op == "ugt":
        return int(evaluate(t.args[0], interp) > evaluate(t.args[1], interp))
    if op == "ult":
        return int(evaluate(t.args[0], interp) < evaluate(t.args[1], interp))
    if op == "add":
        return sum(evaluate(a, interp) for a in t.args) & ((1 << t.width) - 1)
    if op == "ite":
        return evaluate(t.args[1], interp) if evaluate(t.args[0], interp) else evaluate(t.args[2], interp)
    raise ValueError(op)


def functions_in(t: Term, acc: set | None = None) -> set[FunDecl]:
    if acc is None:
        acc = set()
    if t.op == "app":
        acc.add(t.fun)
    elif t.op != "const":
        for a in t.args:
            functions_in(a, acc)
    return acc
