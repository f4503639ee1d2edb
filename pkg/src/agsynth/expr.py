"""Boolean and fixed-width unsigned bitvector expressions used in sketches."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import ParseError, SemanticError

BOOL = 0  # type code for booleans; positive ints are bitvector widths


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: int
    is_bool: bool = False


@dataclass(frozen=True)
class Name(Expr):
    ident: str
    primed: bool = False


@dataclass(frozen=True)
class HoleRef(Expr):
    hole: str


@dataclass(frozen=True)
class Bit(Expr):
    ident: str
    index: int


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    other: Expr


TRUE_E = Const(1, True)
FALSE_E = Const(0, True)

# ---------------------------------------------------------------- parsing

_TOK = re.compile(
    r"\s*(?:(\d+)|(\?[A-Za-z_][A-Za-z0-9_]*)|([A-Za-z_][A-Za-z0-9_]*'?)|(==|!=|<=|>=|[<>+\-&|^!(),\[\]]))"
)

_LEVELS = [("|",), ("^",), ("&",), ("==", "!=", "<", "<=", ">", ">="), ("+", "-")]


class _ExprParser:
    def __init__(self, text: str, line: int | None = None):
        self.text = text
        self.line = line
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOK.match(stripped, pos)
            if not m or m.end() == pos:
                raise self.err(f"unexpected character {stripped[pos]!r}", pos)
            kind = ("num", "hole", "ident", "op")[m.lastindex - 1]
            self.toks.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def err(self, msg: str, pos: int | None = None) -> ParseError:
        if pos is None:
            pos = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)
        if self.line is not None:
            return ParseError(f"{msg} (column {pos + 1})", line=self.line)
        return ParseError(msg, pos=pos)

    def peek(self) -> str | None:
        return self.toks[self.i][1] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> tuple[str, str, int]:
        if self.i >= len(self.toks):
            raise self.err("unexpected end of expression")
        tok = self.toks[self.i]
        if expect is not None and tok[1] != expect:
            raise self.err(f"expected {expect!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.toks:
            raise self.err("empty expression")
        e = self.level(0)
        if self.i != len(self.toks):
            raise self.err(f"unexpected token {self.peek()!r}")
        return e

    def level(self, k: int) -> Expr:
        if k == len(_LEVELS):
            return self.unary()
        left = self.level(k + 1)
        ops = _LEVELS[k]
        if k == 3:
            # comparisons do not chain
            if self.peek() in ops:
                op = self.take()[1]
                left = Binary(op, left, self.level(k + 1))
            return left
        while self.peek() in ops:
            op = self.take()[1]
            left = Binary(op, left, self.level(k + 1))
        return left

    def unary(self) -> Expr:
        if self.peek() == "!":
            self.take()
            return Unary("!", self.unary())
        return self.primary()

    def primary(self) -> Expr:
        kind, tok, pos = self.take()
        if kind == "num":
            return Const(int(tok))
        if kind == "hole":
            return HoleRef(tok[1:])
        if tok == "(":
            e = self.level(0)
            self.take(")")
            return e
        if kind == "ident":
            if tok in ("true", "T"):
                return TRUE_E
            if tok in ("false", "F"):
                return FALSE_E
            if tok == "ite" and self.peek() == "(":
                self.take("(")
                c = self.level(0)
                self.take(",")
                a = self.level(0)
                self.take(",")
                b = self.level(0)
                self.take(")")
                return Ite(c, a, b)
            if self.peek() == "[":
                self.take("[")
                k, idx, _ = self.take()
                if k != "num":
                    raise self.err("bit index must be a number")
                self.take("]")
                return Bit(tok, int(idx))
            if tok.endswith("'"):
                return Name(tok[:-1], True)
            return Name(tok)
        raise self.err(f"unexpected token {tok!r}", pos)


def parse_expr(text: str, line: int | None = None) -> Expr:
    return _ExprParser(text, line).parse()


# ---------------------------------------------------------------- printing

_PREC = {"|": 1, "^": 2, "&": 3, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5}


def render_expr(e: Expr) -> str:
    if isinstance(e, Const):
        if e.is_bool:
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Name):
        return e.ident + ("'" if e.primed else "")
    if isinstance(e, HoleRef):
        return "?" + e.hole
    if isinstance(e, Bit):
        return f"{e.ident}[{e.index}]"
    if isinstance(e, Ite):
        return f"ite({render_expr(e.cond)}, {render_expr(e.then)}, {render_expr(e.other)})"
    if isinstance(e, Unary):
        inner = render_expr(e.arg)
        if isinstance(e.arg, Binary):
            inner = f"({inner})"
        return "!" + inner
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = render_expr(e.left)
        right = render_expr(e.right)
        if isinstance(e.left, Binary) and (_PREC[e.left.op] < p or (p == 4 and _PREC[e.left.op] == 4)):
            left = f"({left})"
        if isinstance(e.right, Binary) and _PREC[e.right.op] <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(e)


# ---------------------------------------------------------------- analysis


def names_in(e: Expr) -> set[str]:
    if isinstance(e, Name) or isinstance(e, Bit):
        return {e.ident}
    if isinstance(e, Unary):
        return names_in(e.arg)
    if isinstance(e, Binary):
        return names_in(e.left) | names_in(e.right)
    if isinstance(e, Ite):
        return names_in(e.cond) | names_in(e.then) | names_in(e.other)
    return set()


def holes_in(e: Expr) -> set[str]:
    if isinstance(e, HoleRef):
        return {e.hole}
    if isinstance(e, Unary):
        return holes_in(e.arg)
    if isinstance(e, Binary):
        return holes_in(e.left) | holes_in(e.right)
    if isinstance(e, Ite):
        return holes_in(e.cond) | holes_in(e.then) | holes_in(e.other)
    return set()


def substitute(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Rebuild ``e`` bottom-up, replacing any node for which ``fn`` returns non-None."""
    r = fn(e)
    if r is not None:
        return r
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.arg, fn))
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, fn), substitute(e.right, fn))
    if isinstance(e, Ite):
        return Ite(substitute(e.cond, fn), substitute(e.then, fn), substitute(e.other, fn))
    return e


def type_of(e: Expr, env: Mapping[str, int], want: int | None = None) -> int:
    """Type-check ``e``; returns BOOL or a bitvector width.

    ``env`` maps names to types.  Untyped numeric literals take their type
    from context (``want``); 0/1 literals are accepted where a boolean is
    expected.
    """
    if isinstance(e, Const):
        if e.is_bool:
            return BOOL
        if want is None:
            return -1  # unresolved literal
        if want == BOOL:
            if e.value not in (0, 1):
                raise SemanticError(f"literal {e.value} used as a boolean")
            return BOOL
        if e.value >= (1 << want):
            raise SemanticError(f"literal {e.value} does not fit in {want} bits")
        return want
    if isinstance(e, (Name, HoleRef)):
        key = _key(e)
        if key not in env:
            raise SemanticError(f"undeclared name {key!r}")
        return env[key]
    if isinstance(e, Bit):
        if e.ident not in env:
            raise SemanticError(f"undeclared name {e.ident!r}")
        w = env[e.ident]
        if w == BOOL or e.index >= w:
            raise SemanticError(f"bit index {e.index} out of range for {e.ident!r}")
        return BOOL
    if isinstance(e, Unary):
        return type_of(e.arg, env, want if want is not None else BOOL)
    if isinstance(e, Ite):
        type_of(e.cond, env, BOOL)
        return _unify(e.then, e.other, env, want)
    if isinstance(e, Binary):
        if e.op in ("==", "!=", "<", "<=", ">", ">="):
            t = _unify(e.left, e.right, env, None)
            if t == -1:
                t = max(_bits_for(e.left), _bits_for(e.right))
                _unify(e.left, e.right, env, t)
            if e.op not in ("==", "!=") and t == BOOL:
                raise SemanticError(f"ordering {e.op!r} applied to booleans")
            return BOOL
        if e.op in ("+", "-"):
            t = _unify(e.left, e.right, env, want)
            if t == BOOL:
                raise SemanticError(f"arithmetic {e.op!r} applied to booleans")
            return t
        return _unify(e.left, e.right, env, want)
    raise TypeError(e)


def _key(e: Expr) -> str:
    if isinstance(e, HoleRef):
        return "?" + e.hole
    return e.ident + ("'" if e.primed else "")


def _bits_for(e: Expr) -> int:
    if isinstance(e, Const):
        return max(1, e.value.bit_length())
    return 1


def _unify(a: Expr, b: Expr, env: Mapping[str, int], want: int | None) -> int:
    ta = type_of(a, env, want)
    tb = type_of(b, env, ta if ta != -1 else want)
    if ta == -1 and tb != -1:
        ta = type_of(a, env, tb)
    if ta != tb:
        raise SemanticError(f"type mismatch between {render_expr(a)!r} and {render_expr(b)!r}")
    return ta


# ---------------------------------------------------------------- evaluation

Lookup = Callable[[str], int]


def compile_expr(e: Expr, env: Mapping[str, int], want: int | None = None) -> Callable[[Lookup], int]:
    """Compile ``e`` to a closure over a name lookup.  Values are plain ints."""
    t = type_of(e, env, want)
    return _compile(e, env, t)


def _compile(e: Expr, env: Mapping[str, int], t: int) -> Callable[[Lookup], int]:
    if isinstance(e, Const):
        v = e.value
        return lambda look: v
    if isinstance(e, Name):
        n = _key(e)
        return lambda look: look(n)
    if isinstance(e, HoleRef):
        n = "?" + e.hole
        return lambda look: look(n)
    if isinstance(e, Bit):
        n, k = e.ident, e.index
        return lambda look: (look(n) >> k) & 1
    if isinstance(e, Unary):
        f = _compile(e.arg, env, t)
        if t == BOOL:
            return lambda look: 1 - f(look)
        mask = (1 << t) - 1
        return lambda look: (~f(look)) & mask
    if isinstance(e, Ite):
        c = _compile(e.cond, env, BOOL)
        a = _compile(e.then, env, t)
        b = _compile(e.other, env, t)
        return lambda look: a(look) if c(look) else b(look)
    if isinstance(e, Binary):
        op = e.op
        if op in ("==", "!=", "<", "<=", ">", ">="):
            st = type_of(e.left, env, None)
            if st == -1:
                st = type_of(e.right, env, None)
            if st == -1:
                st = max(_bits_for(e.left), _bits_for(e.right))
            l, r = _compile(e.left, env, st), _compile(e.right, env, st)
            if op == "==":
                return lambda look: int(l(look) == r(look))
            if op == "!=":
                return lambda look: int(l(look) != r(look))
            if op == "<":
                return lambda look: int(l(look) < r(look))
            if op == "<=":
                return lambda look: int(l(look) <= r(look))
            if op == ">":
                return lambda look: int(l(look) > r(look))
            return lambda look: int(l(look) >= r(look))
        l, r = _compile(e.left, env, t), _compile(e.right, env, t)
        if op == "&":
            if t == BOOL:
                # short-circuit keeps lazy branching small
                return lambda look: r(look) if l(look) else 0
            return lambda look: l(look) & r(look)
        if op == "|":
            if t == BOOL:
                return lambda look: 1 if l(look) else r(look)
            return lambda look: l(look) | r(look)
        if op == "^":
            return lambda look: l(look) ^ r(look)
        mask = (1 << t) - 1
        if op == "+":
            return lambda look: (l(look) + r(look)) & mask
        if op == "-":
            return lambda look: (l(look) - r(look)) & mask
    raise TypeError(e)
