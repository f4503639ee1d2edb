"""Interleaving execution semantics of a sketch at a fixed memory bound.

A :class:`Model` is a problem instantiated at bound ``b``: memory variables
are materialized, update holes are created and every expression is compiled.
:func:`expand_step` enumerates the one-step behaviours from a state by lazy
branching: whenever evaluation touches an unassigned input or hole entry it
forks on all its values, so only the entries that matter are split on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import SemanticError
from .expr import BOOL, compile_expr
from .problem import (
    BUILTIN_SIGNALS,
    SCHED,
    StrategyTables,
    SynthesisProblem,
    Valuation,
    VarDecl,
    enumerate_valuations,
    pack,
)

SYM = "sym"  # hole entry left open; branches carry a guard
UNIV = "univ"  # hole of an unrefined process; branches are universal
TABLE = "table"  # hole entry read from a concrete table


@dataclass(frozen=True)
class HoleInfo:
    name: str
    owner: int
    role: str
    outputs: tuple[str, ...]
    out_widths: tuple[int, ...]
    observes: tuple[str, ...]
    obs_widths: tuple[int, ...]

    @property
    def out_width(self) -> int:
        return sum(self.out_widths)

    @property
    def in_width(self) -> int:
        return sum(self.obs_widths)

    @property
    def rows(self) -> int:
        return 1 << self.in_width

    def row_valuations(self) -> list[Valuation]:
        return enumerate_valuations(list(zip(self.observes, self.obs_widths)))

    def out_valuations(self) -> list[Valuation]:
        return enumerate_valuations(list(zip(self.outputs, self.out_widths)))


@dataclass(frozen=True)
class StepCase:
    sched: int
    inputs: tuple[tuple[str, int], ...]  # uncontrollable inputs read, sched first
    guards: tuple[tuple[str, int, int], ...]  # (hole, row, value) for open entries
    choices: tuple[tuple[str, int, int], ...]  # universally chosen entries of unrefined holes
    succ: tuple[int, ...]
    letter: tuple[int, ...]


class _Branch(Exception):
    __slots__ = ("key", "n")

    def __init__(self, key, n: int):
        self.key = key
        self.n = n


class Model:
    def __init__(self, p: SynthesisProblem, b: int):
        if b < 0:
            raise ValueError("memory bound must be non-negative")
        self.problem = p
        self.bound = b
        decls: list[VarDecl] = list(p.variables)
        mem_vars: dict[str, VarDecl] = {}
        for md in p.memory:
            w = md.width(b)
            if w <= 0:
                continue
            owner = "shared" if md.shared else f"p{md.owner}"
            mem_vars[md.name] = VarDecl(md.name, w, False, owner, "memory", 0)
        self.memory_vars = tuple(mem_vars.values())

        states = [v for v in decls if v.kind == "state"] + list(mem_vars.values())
        self.state_decls = tuple(states)
        self.state_names = tuple(v.name for v in states)
        self.state_widths = tuple(v.width for v in states)
        self.state_index = {n: i for i, n in enumerate(self.state_names)}
        self.init = tuple(v.init or 0 for v in states)
        self.state_bits = sum(self.state_widths)

        controllable = p.controllable()
        self.inputs = tuple(v for v in decls if v.kind == "input" and v.name not in controllable)
        self.input_names = tuple(v.name for v in self.inputs)

        widths = {v.name: v.width for v in decls}
        widths.update({n: v.width for n, v in mem_vars.items()})
        signal_names = [s for s, _ in p.signals]
        for s in signal_names:
            widths[s] = 1

        holes = []
        for h in p.holes:
            if h.role == "memory":
                md = next(m for m in p.memory if m.hole == h.name)
                if md.name not in mem_vars:
                    continue
            obs = tuple(o for o in h.observes if o in widths)
            holes.append(
                HoleInfo(
                    h.name, h.owner, h.role, h.outputs,
                    tuple(widths[o] for o in h.outputs),
                    obs, tuple(widths[o] for o in obs),
                )
            )
        self.holes = tuple(holes)
        self.hole_info = {h.name: h for h in holes}

        # type environment for compilation
        env: dict[str, int] = {v.name: v.type_code for v in decls}
        env.update({n: v.width for n, v in mem_vars.items()})
        env.update({s: BOOL for s in signal_names})
        for h in holes:
            if len(h.outputs) == 1:
                env["?" + h.name] = env[h.outputs[0]]
        self.env = env

        # name resolution table: (tag, payload...)
        kinds: dict[str, tuple] = {}
        for i, n in enumerate(self.state_names):
            kinds[n] = (0, i)
        for v in self.inputs:
            kinds[v.name] = (1, 1 << v.width)
        for h in holes:
            shift = h.out_width
            for o, w in zip(h.outputs, h.out_widths):
                shift -= w
                if h.role == "control":
                    kinds[o] = (3, h, shift, (1 << w) - 1)
            if len(h.outputs) == 1:
                kinds["?" + h.name] = (3, h, 0, (1 << h.out_width) - 1)
        for s, e in p.signals:
            kinds[s] = (2, compile_expr(e, env, BOOL))
        # holes of p.holes dropped at this bound (memory absent) must not be reachable
        self.kinds = kinds

        self.updates: dict[int, list[tuple[int, Callable]]] = {1: [], 2: []}
        for proc in p.processes:
            for vname, e in proc.assignments:
                idx = self.state_index[vname]
                fn = compile_expr(e, env, env[vname])
                self.updates[proc.index].append((idx, fn))
        for h in holes:
            if h.role == "memory":
                idx = self.state_index[h.outputs[0]]
                key = "?" + h.name
                self.updates[h.owner].append((idx, lambda look, key=key: look(key)))

        self.atoms = tuple(sorted(p.specs[0].atoms() | p.specs[1].atoms() | set(BUILTIN_SIGNALS)))
        for a in self.atoms:
            if a not in kinds:
                raise SemanticError(f"spec atom {a!r} is not a signal")

    # ------------------------------------------------------------ helpers

    def hole_modes(self, refined: Sequence[int], tables: bool = False) -> dict[str, str]:
        """How each hole is treated when ``refined`` processes are being synthesized."""
        modes = {}
        for h in self.holes:
            if h.role == "memory" or h.owner in refined:
                modes[h.name] = TABLE if tables else SYM
            else:
                modes[h.name] = UNIV
        return modes

    def state_valuation(self, state: Sequence[int]) -> Valuation:
        return Valuation(dict(zip(self.state_names, state)), dict(zip(self.state_names, self.state_widths)))

    def all_states(self) -> list[tuple[int, ...]]:
        return [tuple(v[n] for n in self.state_names) for v in enumerate_valuations(list(zip(self.state_names, self.state_widths)))]

    def global_widths(self) -> dict[str, int]:
        w = dict(zip(self.state_names, self.state_widths))
        for v in self.inputs:
            w[v.name] = v.width
        for h in self.holes:
            if h.role == "control":
                for o, ow in zip(h.outputs, h.out_widths):
                    w[o] = ow
        return w

    def letter_dict(self, letter: Sequence[int]) -> dict[str, bool]:
        return {a: bool(x) for a, x in zip(self.atoms, letter)}

    # ------------------------------------------------------------ stepping

    def _run(self, state, assign, modes, tables, atoms, outputs_given=False, advance=True):
        kinds = self.kinds
        cache: dict[str, int] = {}

        def hole_value(h: HoleInfo) -> int:
            row = 0
            for o, w in zip(h.observes, h.obs_widths):
                row = (row << w) | look(o)
            mode = modes[h.name]
            if mode == TABLE:
                return tables[h.name][row]
            key = (h.name, row)
            v = assign.get(key)
            if v is None:
                raise _Branch(key, 1 << h.out_width)
            return v

        def look(n: str) -> int:
            v = cache.get(n)
            if v is not None:
                return v
            k = kinds[n]
            tag = k[0]
            if tag == 0:
                v = state[k[1]]
            elif tag == 1:
                v = assign.get(n)
                if v is None:
                    raise _Branch(n, k[1])
            elif tag == 2:
                v = k[1](look)
            else:
                h = k[1]
                if outputs_given and h.role == "control":
                    v = assign[h.outputs[0] if n.startswith("?") else n]
                else:
                    v = (hole_value(k[1]) >> k[2]) & k[3]
            cache[n] = v
            return v

        s = assign[SCHED]
        succ = list(state)
        if advance:
            for idx, fn in self.updates[1 if s else 2]:
                succ[idx] = fn(look)
        letter = tuple(look(a) for a in atoms)
        return tuple(succ), letter

    def expand_step(
        self,
        state: tuple[int, ...],
        modes: Mapping[str, str],
        tables: Mapping[str, Sequence[int]] | None = None,
        atoms: Sequence[str] | None = None,
    ) -> list[StepCase]:
        """All behaviours from ``state`` split by scheduler, inputs and hole entries."""
        if atoms is None:
            atoms = self.atoms
        out: list[StepCase] = []
        stack: list[dict] = [{SCHED: 1}, {SCHED: 0}]
        while stack:
            assign = stack.pop()
            try:
                succ, letter = self._run(state, assign, modes, tables, atoms)
            except _Branch as br:
                for val in reversed(range(br.n)):
                    nxt = dict(assign)
                    nxt[br.key] = val
                    stack.append(nxt)
                continue
            inputs, guards, choices = [], [], []
            for k, v in assign.items():
                if isinstance(k, tuple):
                    (guards if modes[k[0]] == SYM else choices).append((k[0], k[1], v))
                else:
                    inputs.append((k, v))
            out.append(StepCase(assign[SCHED], tuple(inputs), tuple(guards), tuple(choices), succ, letter))
        return out


# ---------------------------------------------------------------- public API


def _state_of(m: Model, g: Mapping[str, int]) -> tuple[int, ...]:
    return tuple(int(g[n]) for n in m.state_names)


def _assign_of(m: Model, g: Mapping[str, int], with_outputs: bool = False) -> dict:
    if SCHED not in g:
        raise SemanticError(f"global valuation misses {SCHED!r}")
    assign = {SCHED: int(g[SCHED])}
    for n in m.input_names:
        if n in g:
            assign[n] = int(g[n])
    if with_outputs:
        for h in m.holes:
            if h.role == "control":
                for o in h.outputs:
                    if o in g:
                        assign[o] = int(g[o])
    return assign


def step(p: SynthesisProblem, t: StrategyTables, g: Mapping[str, int]) -> Valuation:
    """Successor state (including memory) of the global valuation ``g`` under tables ``t``."""
    m = p.at_bound(t.bound)
    modes = {h.name: TABLE for h in m.holes}
    try:
        succ, _ = m._run(_state_of(m, g), _assign_of(m, g), modes, t.as_dict(), ())
    except _Branch as br:
        raise SemanticError(f"global valuation misses input {br.key!r}") from None
    return m.state_valuation(succ)


def signals_of(p: SynthesisProblem, g: Mapping[str, int], b: int = 0) -> dict[str, bool]:
    """Values of all signals and spec atoms under a total global valuation.

    The valuation must include the scheduler bit and the controllable inputs.
    """
    m = p.at_bound(b)
    names = tuple(dict.fromkeys([s for s, _ in p.signals] + list(m.atoms)))
    try:
        _, letter = m._run(_state_of(m, g), _assign_of(m, g, True), {}, None, names,
                           outputs_given=True, advance=False)
    except (_Branch, KeyError) as err:
        raise SemanticError(f"global valuation is not total: {err}") from None
    return {n: bool(x) for n, x in zip(names, letter)}


def eval_expr(p: SynthesisProblem, e, v: Mapping[str, int], holes: StrategyTables | None = None, b: int = 0) -> int:
    """Evaluate an expression under a valuation; ``?h`` is resolved through ``holes``."""
    m = p.at_bound(holes.bound if holes is not None else b)
    fn = compile_expr(e, m.env)
    tabs = holes.as_dict() if holes is not None else {}

    def look(n: str) -> int:
        if n in v:
            return int(v[n])
        k = m.kinds.get(n)
        if k is None:
            raise SemanticError(f"no value for {n!r}")
        if k[0] == 2:
            return k[1](look)
        if k[0] == 3:
            h: HoleInfo = k[1]
            if h.name not in tabs:
                raise SemanticError(f"no table for hole {h.name!r}")
            row = pack([look(o) for o in h.observes], h.obs_widths)
            return (tabs[h.name][row] >> k[2]) & k[3]
        raise SemanticError(f"no value for {n!r}")

    return fn(look)
