"""LTL formulas: syntax tree, parser, negation normal form and lasso semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, UndeclaredAtomError

UNARY_TEMPORAL = ("next", "eventually", "always")
BINARY_TEMPORAL = ("until", "release")


@dataclass(frozen=True)
class Formula:
    op: str
    args: tuple["Formula", ...] = ()
    name: str = ""

    def __str__(self) -> str:
        return render_ltl(self)

    def atoms(self) -> frozenset[str]:
        if self.op == "atom":
            return frozenset([self.name])
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.atoms()
        return out

    def depth(self) -> int:
        if not self.args:
            return 0
        return 1 + max(a.depth() for a in self.args)


TRUE = Formula("true")
FALSE = Formula("false")


def Atom(name: str) -> Formula:
    return Formula("atom", (), name)


def Not(a: Formula) -> Formula:
    return Formula("not", (a,))


def And(*xs: Formula) -> Formula:
    return _nary("and", xs, TRUE)


def Or(*xs: Formula) -> Formula:
    return _nary("or", xs, FALSE)


def _nary(op: str, xs: Sequence[Formula], unit: Formula) -> Formula:
    xs = tuple(xs)
    if not xs:
        return unit
    if len(xs) == 1:
        return xs[0]
    out = xs[-1]
    for x in reversed(xs[:-1]):
        out = Formula(op, (x, out))
    return out


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula("implies", (a, b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Formula("iff", (a, b))


def Next(a: Formula) -> Formula:
    return Formula("next", (a,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula("until", (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula("release", (a, b))


def Eventually(a: Formula) -> Formula:
    return Formula("eventually", (a,))


def Always(a: Formula) -> Formula:
    return Formula("always", (a,))


def fairness(sched: str = "sched") -> Formula:
    s = Atom(sched)
    return And(Always(Eventually(s)), Always(Eventually(Not(s))))


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(<->)|(->)|(&&|\|\||[!&|()~])|([A-Za-z_][A-Za-z0-9_]*))")
_TEMPORAL_LETTERS = set("GFX")


def _tokenize(text: str, signals: frozenset[str] | None) -> list[tuple[str, int]]:
    toks: list[tuple[str, int]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos=pos)
        start = m.start(m.lastindex)
        tok = m.group(m.lastindex)
        pos = m.end()
        if tok == "&&":
            tok = "&"
        elif tok == "||":
            tok = "|"
        elif tok == "~":
            tok = "!"
        if m.lastindex == 4 and len(tok) > 1 and set(tok) <= _TEMPORAL_LETTERS:
            # "GF p" style operator clusters, unless the name is a real signal
            if signals is None or tok not in signals:
                for i, ch in enumerate(tok):
                    toks.append((ch, start + i))
                continue
        toks.append((tok, start))
    return toks


class _LtlParser:
    def __init__(self, text: str, signals: frozenset[str] | None):
        self.text = text
        self.signals = signals
        self.toks = _tokenize(text, signals)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula", pos=self.pos())
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, found {tok!r}", pos=self.pos())
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if not self.toks:
            raise ParseError("empty formula", pos=0)
        f = self.iff()
        if self.peek() is not None:
            raise ParseError(f"unexpected token {self.peek()!r}", pos=self.pos())
        return f

    def iff(self) -> Formula:
        left = self.implies()
        if self.peek() == "<->":
            self.take()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self) -> Formula:
        xs = [self.conj()]
        while self.peek() == "|":
            self.take()
            xs.append(self.conj())
        return Or(*xs)

    def conj(self) -> Formula:
        xs = [self.binary_temporal()]
        while self.peek() == "&":
            self.take()
            xs.append(self.binary_temporal())
        return And(*xs)

    def binary_temporal(self) -> Formula:
        left = self.unary()
        op = self.peek()
        if op in ("U", "R", "W"):
            self.take()
            right = self.binary_temporal()
            if op == "U":
                return Until(left, right)
            if op == "R":
                return Release(left, right)
            # a W b == b R (a | b)
            return Release(right, Or(left, right))
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "G":
            self.take()
            return Always(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        at = self.pos()
        tok = self.take()
        if tok == "(":
            f = self.iff()
            self.take(")")
            return f
        if tok in ("true", "TRUE", "True"):
            return TRUE
        if tok in ("false", "FALSE", "False"):
            return FALSE
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in ("U", "R", "W"):
            if self.signals is not None and tok not in self.signals:
                raise UndeclaredAtomError(tok)
            return Atom(tok)
        raise ParseError(f"unexpected token {tok!r}", pos=at)


def parse_ltl(text: str, signals: Iterable[str] | None = None) -> Formula:
    """Parse an LTL formula.

    When ``signals`` is given, every atom must be one of them.  Passing
    ``None`` accepts any identifier as an atom.
    """
    sig = None if signals is None else frozenset(signals)
    return _LtlParser(text, sig).parse()


_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "until": 5, "release": 5}


def render_ltl(f: Formula) -> str:
    op = f.op
    if op == "atom":
        return f.name
    if op in ("true", "false"):
        return op
    if op in ("not", "next", "eventually", "always"):
        sym = {"not": "!", "next": "X ", "eventually": "F ", "always": "G "}[op]
        inner = render_ltl(f.args[0])
        if f.args[0].op in _PREC:
            inner = f"({inner})"
        return sym + inner
    sym = {"iff": "<->", "implies": "->", "or": "|", "and": "&", "until": "U", "release": "R"}[op]
    parts = []
    for i, a in enumerate(f.args):
        s = render_ltl(a)
        # the parser nests chains of & and | to the right
        if a.op in _PREC and _PREC[a.op] <= _PREC[op] and not (i == 1 and a.op == op and op in ("and", "or")):
            s = f"({s})"
        parts.append(s)
    return f" {sym} ".join(parts)


# ---------------------------------------------------------------- normal form


def to_nnf(f: Formula) -> Formula:
    """Negation normal form over atoms, literals, and/or, X, U and R."""
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    op = f.op
    if op == "true":
        return FALSE if neg else TRUE
    if op == "false":
        return TRUE if neg else FALSE
    if op == "atom":
        return Not(f) if neg else f
    if op == "not":
        return _nnf(f.args[0], not neg)
    if op == "and" or op == "or":
        a, b = (_nnf(x, neg) for x in f.args)
        flip = (op == "and") == neg
        return Formula("or" if flip else "and", (a, b))
    if op == "implies":
        a, b = f.args
        return _nnf(Formula("or", (Not(a), b)), neg)
    if op == "iff":
        a, b = f.args
        return _nnf(Formula("or", (And(a, b), And(Not(a), Not(b)))), neg)
    if op == "next":
        return Next(_nnf(f.args[0], neg))
    if op == "eventually":
        return _nnf(Until(TRUE, f.args[0]), neg)
    if op == "always":
        return _nnf(Release(FALSE, f.args[0]), neg)
    if op == "until":
        a, b = (_nnf(x, neg) for x in f.args)
        return Release(a, b) if neg else Until(a, b)
    if op == "release":
        a, b = (_nnf(x, neg) for x in f.args)
        return Until(a, b) if neg else Release(a, b)
    raise ValueError(f"unknown operator {op}")


# ---------------------------------------------------------------- lassos


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word: ``stem`` once, then ``loop`` forever."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def __len__(self) -> int:
        return len(self.stem) + len(self.loop)

    def letter(self, i: int):
        n = len(self.stem)
        if i < n:
            return self.stem[i]
        return self.loop[(i - n) % len(self.loop)]

    def positions(self) -> list:
        return list(self.stem) + list(self.loop)

    def successor(self, i: int) -> int:
        i += 1
        return len(self.stem) if i == len(self) else i


def eval_ltl_on_lasso(f: Formula, w: Lasso) -> bool:
    """Truth of ``f`` at position 0 of the infinite word ``w``."""
    letters: list[Mapping[str, bool]] = w.positions()
    n = len(letters)
    succ = [w.successor(i) for i in range(n)]
    memo: dict[Formula, list[bool]] = {}

    def ev(g: Formula) -> list[bool]:
        got = memo.get(g)
        if got is not None:
            return got
        op = g.op
        if op == "true":
            r = [True] * n
        elif op == "false":
            r = [False] * n
        elif op == "atom":
            r = [bool(letters[i][g.name]) for i in range(n)]
        elif op == "not":
            r = [not x for x in ev(g.args[0])]
        elif op == "and":
            a, b = ev(g.args[0]), ev(g.args[1])
            r = [x and y for x, y in zip(a, b)]
        elif op == "or":
            a, b = ev(g.args[0]), ev(g.args[1])
            r = [x or y for x, y in zip(a, b)]
        elif op == "implies":
            a, b = ev(g.args[0]), ev(g.args[1])
            r = [(not x) or y for x, y in zip(a, b)]
        elif op == "iff":
            a, b = ev(g.args[0]), ev(g.args[1])
            r = [x == y for x, y in zip(a, b)]
        elif op == "next":
            a = ev(g.args[0])
            r = [a[succ[i]] for i in range(n)]
        elif op in ("eventually", "always", "until", "release"):
            if op == "eventually":
                a, b, until = [True] * n, ev(g.args[0]), True
            elif op == "always":
                a, b, until = [False] * n, ev(g.args[0]), False
            else:
                a, b, until = ev(g.args[0]), ev(g.args[1]), op == "until"
            r = _fixpoint(a, b, succ, until)
        else:
            raise ValueError(f"unknown operator {op}")
        memo[g] = r
        return r

    return ev(f)[0]


def _fixpoint(a: list[bool], b: list[bool], succ: list[int], until: bool) -> list[bool]:
    # a U b: least fixpoint of  b | (a & X z);  a R b: greatest of  b & (a | X z)
    n = len(a)
    z = [not until] * n
    changed = True
    while changed:
        changed = False
        for i in reversed(range(n)):
            nz = (b[i] or (a[i] and z[succ[i]])) if until else (b[i] and (a[i] or z[succ[i]]))
            if nz != z[i]:
                z[i] = nz
                changed = True
    return z
