"""Problem data model: variables, valuations, holes, memory and processes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ConflictError, SemanticError
from .expr import BOOL, Expr
from .ltl import Formula

SCHED = "sched"
BUILTIN_SIGNALS = ("sched_p1", "sched_p2")
MODES = ("coop", "comp", "ags")
MODE_ALIASES = {"cooperative": "coop", "competitive": "comp", "coop": "coop", "comp": "comp", "ags": "ags"}


@dataclass(frozen=True)
class VarDecl:
    name: str
    width: int
    is_bool: bool
    owner: str  # p1 | p2 | shared
    kind: str  # state | input | memory
    init: int | None = None

    @property
    def type_code(self) -> int:
        return BOOL if self.is_bool else self.width


@dataclass(frozen=True)
class Hole:
    name: str
    owner: int
    outputs: tuple[str, ...]
    observes: tuple[str, ...]
    role: str = "control"  # control | memory


@dataclass(frozen=True)
class MemoryDecl:
    owner: int
    name: str
    bits: int | None  # None: scaled by the driver's bound b
    shared: bool
    observes: tuple[str, ...]

    @property
    def hole(self) -> str:
        return f"mu{self.owner}"

    def width(self, b: int) -> int:
        return b if self.bits is None else self.bits


@dataclass(frozen=True)
class CostDecl:
    name: str
    hole: str
    predicate: Expr
    weight: int


@dataclass(frozen=True)
class Process:
    index: int
    state_vars: tuple[str, ...]
    inputs: tuple[str, ...]
    assignments: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class SynthesisProblem:
    name: str
    variables: tuple[VarDecl, ...]
    processes: tuple[Process, Process]
    holes: tuple[Hole, ...]
    memory: tuple[MemoryDecl, ...]
    signals: tuple[tuple[str, Expr], ...]
    specs: tuple[Formula, Formula]
    costs: tuple[CostDecl, ...] = ()
    mode: str = "ags"
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def var(self, name: str) -> VarDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def var_map(self) -> dict[str, VarDecl]:
        return {v.name: v for v in self.variables}

    @property
    def signal_map(self) -> dict[str, Expr]:
        return dict(self.signals)

    def hole(self, name: str) -> Hole:
        for h in self.holes:
            if h.name == name:
                return h
        raise KeyError(name)

    def state_vars(self) -> list[VarDecl]:
        return [v for v in self.variables if v.kind == "state"]

    def controllable(self) -> set[str]:
        return {o for h in self.holes for o in h.outputs}

    def at_bound(self, b: int):
        """The executable model of this problem with b-bit memories."""
        from .semantics import Model

        key = ("model", b)
        m = self._cache.get(key)
        if m is None:
            m = Model(self, b)
            self._cache[key] = m
        return m


# ---------------------------------------------------------------- valuations


class Valuation(Mapping[str, int]):
    """Total assignment of unsigned values to a declared set of variables."""

    __slots__ = ("_vals", "_widths", "_hash")

    def __init__(self, values: Mapping[str, int], widths: Mapping[str, int]):
        vals = {}
        for name, w in widths.items():
            if name not in values:
                raise ValueError(f"valuation misses variable {name!r}")
            v = int(values[name])
            if v < 0 or v >= (1 << w):
                raise ValueError(f"value {v} out of range for {name!r}")
            vals[name] = v
        extra = set(values) - set(widths)
        if extra:
            raise ValueError(f"undeclared variables {sorted(extra)}")
        self._vals = vals
        self._widths = dict(widths)
        self._hash = None

    def __getitem__(self, k: str) -> int:
        return self._vals[k]

    def __iter__(self) -> Iterator[str]:
        return iter(self._vals)

    def __len__(self) -> int:
        return len(self._vals)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._vals.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Valuation):
            return self._vals == other._vals and self._widths == other._widths
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self._vals.items())
        return f"Valuation({inner})"

    @property
    def widths(self) -> dict[str, int]:
        return dict(self._widths)

    def bit(self, name: str, i: int) -> bool:
        if i >= self._widths[name]:
            raise IndexError(i)
        return bool((self._vals[name] >> i) & 1)


def restrict(v: Valuation, names: Iterable[str]) -> Valuation:
    names = list(names)
    missing = [n for n in names if n not in v]
    if missing:
        raise KeyError(f"restriction to variables outside the valuation: {missing}")
    w = v.widths
    return Valuation({n: v[n] for n in names}, {n: w[n] for n in names})


def concat(u: Valuation, w: Valuation) -> Valuation:
    vals = dict(u)
    widths = u.widths
    for k, x in w.items():
        if k in vals:
            if vals[k] != x or widths[k] != w.widths[k]:
                raise ConflictError(f"valuations disagree on {k!r}")
            continue
        vals[k] = x
        widths[k] = w.widths[k]
    return Valuation(vals, widths)


def enumerate_valuations(variables: Sequence) -> list[Valuation]:
    """All valuations of ``variables`` in lexicographic order, first variable most significant.

    Items may be VarDecl objects or ``(name, width)`` pairs.
    """
    pairs = []
    for v in variables:
        if isinstance(v, VarDecl):
            pairs.append((v.name, v.width))
        else:
            pairs.append((v[0], int(v[1])))
    widths = dict(pairs)
    out = []
    for combo in itertools.product(*[range(1 << w) for _, w in pairs]):
        out.append(Valuation(dict(zip((n for n, _ in pairs), combo)), widths))
    return out


def pack(values: Sequence[int], widths: Sequence[int]) -> int:
    """Concatenate values MSB-first."""
    out = 0
    for v, w in zip(values, widths):
        out = (out << w) | v
    return out


def unpack(x: int, widths: Sequence[int]) -> list[int]:
    out = []
    for w in reversed(widths):
        out.append(x & ((1 << w) - 1))
        x >>= w
    return list(reversed(out))


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class StrategyTables:
    """For each hole, its output value for every observation row.

    Row ``r`` is the observation valuation whose MSB-first concatenation
    over the hole's observation list equals ``r``; multi-output holes pack
    their outputs the same way.
    """

    tables: tuple[tuple[str, tuple[int, ...]], ...]
    bound: int = 0
    mode: str = "ags"

    @staticmethod
    def of(tables: Mapping[str, Sequence[int]], bound: int = 0, mode: str = "ags") -> "StrategyTables":
        return StrategyTables(tuple(sorted((k, tuple(int(x) for x in v)) for k, v in tables.items())), bound, mode)

    def __getitem__(self, hole: str) -> tuple[int, ...]:
        for k, v in self.tables:
            if k == hole:
                return v
        raise KeyError(hole)

    def __contains__(self, hole: str) -> bool:
        return any(k == hole for k, _ in self.tables)

    def as_dict(self) -> dict[str, tuple[int, ...]]:
        return dict(self.tables)

    def replace(self, **changes: Sequence[int]) -> "StrategyTables":
        d = self.as_dict()
        d.update({k: tuple(v) for k, v in changes.items()})
        return StrategyTables.of(d, self.bound, self.mode)


def validate_tables(p: SynthesisProblem, t: StrategyTables, holes: Iterable[str] | None = None) -> None:
    m = p.at_bound(t.bound)
    names = list(holes) if holes is not None else [h.name for h in m.holes]
    for name in names:
        h = m.hole_info[name]
        if name not in t:
            raise SemanticError(f"no table for hole {name!r}")
        tab = t[name]
        if len(tab) != h.rows:
            raise SemanticError(f"table for {name!r} has {len(tab)} rows, expected {h.rows}")
        if any(x < 0 or x >= (1 << h.out_width) for x in tab):
            raise SemanticError(f"table for {name!r} has out-of-range outputs")
