"""Explicit-state verification of strategy tables and brute-force synthesis."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .automata import UCW, _tarjan, translate_to_ucw
from .errors import BudgetExceeded
from .ltl import And, Formula, Implies, Lasso, fairness
from .problem import SCHED, StrategyTables, SynthesisProblem, validate_tables
from .semantics import TABLE, Model, _Branch

DEFAULT_ENUM_BUDGET = 1 << 20


@dataclass(frozen=True)
class Verdict:
    holds: bool
    tag: str = ""
    counterexample: Lasso | None = None  # lasso of global valuations (dicts)
    vacuous: bool = False
    states_explored: int = 0

    def __post_init__(self):
        if self.holds and self.counterexample is not None:
            raise ValueError("a holding verdict carries no counterexample")


@dataclass(frozen=True)
class AgsReport:
    mode: str
    verdicts: tuple[Verdict, Verdict, Verdict]

    @property
    def valid(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def first_violation(self) -> Verdict | None:
        for v in self.verdicts:
            if not v.holds:
                return v
        return None


CONDITION_TAGS = ("i", "ii", "iii")


def fair_formula() -> Formula:
    return fairness("sched_p1")


def instance_specs(p: SynthesisProblem, mode: str) -> list[tuple[str, Formula, tuple[int, ...]]]:
    """(condition tag, checked formula, refined processes) for each instance of ``mode``."""
    fair = fair_formula()
    phi1, phi2 = p.specs
    if mode == "coop":
        return [("iii", Implies(fair, And(phi1, phi2)), (1, 2))]
    if mode == "comp":
        return [("i", Implies(fair, phi1), (1,)), ("ii", Implies(fair, phi2), (2,))]
    if mode == "ags":
        return [
            ("i", Implies(And(fair, phi2), phi1), (1,)),
            ("ii", Implies(And(fair, phi1), phi2), (2,)),
            ("iii", Implies(fair, And(phi1, phi2)), (1, 2)),
        ]
    raise ValueError(f"unknown mode {mode!r}")


def restrict_tables(m: Model, t: StrategyTables, refined: Sequence[int]) -> StrategyTables:
    """Tables of the holes that stay fixed when ``refined`` processes are checked."""
    keep = {h.name for h in m.holes if h.role == "memory" or h.owner in refined}
    return StrategyTables.of({k: v for k, v in t.tables if k in keep}, t.bound, t.mode)


def model_check(
    p: SynthesisProblem,
    t: StrategyTables,
    spec: Formula,
    refined: Sequence[int],
    tag: str = "",
    ucw: UCW | None = None,
) -> Verdict:
    """Check the composition against ``spec``.

    Holes of refined processes and all memory-update holes follow ``t``;
    the other process keeps its sketch nondeterminism.
    """
    m = p.at_bound(t.bound)
    modes = m.hole_modes(refined, tables=True)
    validate_tables(p, t, [h for h, md in modes.items() if md == TABLE])
    tabs = t.as_dict()
    a = ucw if ucw is not None else translate_to_ucw(spec)
    atoms = tuple(sorted(a.atoms))
    return _check(m, a, modes, tabs, atoms, tag)


def _check(m: Model, a: UCW, modes, tabs, atoms, tag: str) -> Verdict:
    cases_of: dict[tuple, list] = {}
    succ_cache: dict[tuple, frozenset] = {}
    start = (a.initial, m.init)
    index = {start: 0}
    nodes = [start]
    edges: list = [None]
    work = deque([0])
    while work:
        i = work.popleft()
        q, st = nodes[i]
        cs = cases_of.get(st)
        if cs is None:
            cs = m.expand_step(st, modes, tabs, atoms)
            cases_of[st] = cs
        out = []
        for c in cs:
            key = (q, c.letter)
            qs = succ_cache.get(key)
            if qs is None:
                qs = a.successors(q, dict(zip(atoms, c.letter)))
                succ_cache[key] = qs
            for q2 in sorted(qs):
                node = (q2, c.succ)
                j = index.get(node)
                if j is None:
                    j = len(nodes)
                    index[node] = j
                    nodes.append(node)
                    edges.append(None)
                    work.append(j)
                out.append((j, c))
        edges[i] = out
    n = len(nodes)
    succ = {i: [j for j, _ in edges[i]] for i in range(n)}
    for comp in _tarjan(n, succ):
        cset = set(comp)
        cyclic = len(comp) > 1 or comp[0] in succ[comp[0]]
        if not cyclic:
            continue
        bad = [x for x in comp if nodes[x][0] in a.rejecting]
        if bad:
            lasso = _lasso(m, nodes, edges, cset, min(bad), modes, tabs)
            return Verdict(False, tag, lasso, states_explored=n)
    return Verdict(True, tag, states_explored=n)


def _bfs_path(edges, src: int, targets: set[int], allowed: set[int] | None, nonempty: bool = False):
    """Shortest edge path from ``src`` into ``targets`` (at least one edge if ``nonempty``)."""
    prev: dict[int, tuple[int, object]] = {}
    seen = {src} if not nonempty else set()
    frontier = deque([src])
    if not nonempty and src in targets:
        return []
    while frontier:
        u = frontier.popleft()
        for v, c in edges[u]:
            if allowed is not None and v not in allowed:
                continue
            if v in seen:
                continue
            seen.add(v)
            prev[v] = (u, c)
            if v in targets:
                path = []
                x = v
                while True:
                    pu, pc = prev[x]
                    path.append((pu, pc, x))
                    x = pu
                    if x == src:
                        break
                return list(reversed(path))
            frontier.append(v)
    return None


def _lasso(m: Model, nodes, edges, comp: set[int], target: int, modes, tabs) -> Lasso:
    stem = _bfs_path(edges, 0, {target}, None)
    loop = _bfs_path(edges, target, {target}, comp, nonempty=True)
    assert stem is not None and loop is not None
    stem_g = [global_valuation(m, nodes[u][1], c, modes, tabs) for u, c, _ in stem]
    loop_g = [global_valuation(m, nodes[u][1], c, modes, tabs) for u, c, _ in loop]
    return Lasso(tuple(stem_g), tuple(loop_g))


def global_valuation(m: Model, state, case, modes, tabs) -> dict[str, int]:
    """Total valuation of state, inputs and controllable outputs for one step."""
    assign: dict = dict(case.inputs)
    for v in m.inputs:
        assign.setdefault(v.name, 0)
    assign.setdefault(SCHED, case.sched)
    for h, row, val in case.choices:
        assign[(h, row)] = val
    for h, row, val in case.guards:
        assign[(h, row)] = val
    outs = tuple(o for h in m.holes if h.role == "control" for o in h.outputs)
    while True:
        try:
            _, vals = m._run(state, assign, modes, tabs, outs)
            break
        except _Branch as br:
            assign[br.key] = 0  # entry never read in this step
    g = dict(zip(m.state_names, state))
    for v in m.inputs:
        g[v.name] = assign[v.name]
    g.update(zip(outs, vals))
    return g


def check_solution(p: SynthesisProblem, t: StrategyTables, mode: str) -> AgsReport:
    specs = {tag: (f, r) for tag, f, r in instance_specs(p, mode)}
    verdicts = []
    for tag in CONDITION_TAGS:
        if tag in specs:
            f, r = specs[tag]
            verdicts.append(model_check(p, restrict_tables(p.at_bound(t.bound), t, r), f, r, tag))
        else:
            verdicts.append(Verdict(True, tag, vacuous=True))
    return AgsReport(mode, tuple(verdicts))


def brute_force_synthesize(
    p: SynthesisProblem, b: int, mode: str, budget: int = DEFAULT_ENUM_BUDGET, limit: int | None = None
) -> list[StrategyTables]:
    """Every table combination at bound ``b`` that passes ``check_solution``.

    Verdicts of an instance only depend on the holes it fixes, so they are
    cached on those tables.
    """
    m = p.at_bound(b)
    holes = m.holes
    bits = [h.rows * h.out_width for h in holes]
    total = 1
    for x in bits:
        total <<= x
    if total > budget:
        raise BudgetExceeded(f"{total} candidate tables exceed the budget of {budget}")
    insts = []
    for tag, f, refined in instance_specs(p, mode):
        a = translate_to_ucw(f)
        modes = m.hole_modes(refined, tables=True)
        fixed = tuple(i for i, h in enumerate(holes) if modes[h.name] == TABLE)
        insts.append((tag, a, modes, fixed, tuple(sorted(a.atoms)), {}))
    domains = []
    for h in holes:
        domains.append(list(itertools.product(range(1 << h.out_width), repeat=h.rows)))
    found = []
    for combo in itertools.product(*domains):
        tabs = {h.name: combo[i] for i, h in enumerate(holes)}
        ok = True
        for tag, a, modes, fixed, atoms, cache in insts:
            key = tuple(combo[i] for i in fixed)
            v = cache.get(key)
            if v is None:
                v = _check(m, a, modes, tabs, atoms, tag).holds
                cache[key] = v
            if not v:
                ok = False
                break
        if ok:
            found.append(StrategyTables.of(tabs, b, mode))
            if limit is not None and len(found) >= limit:
                break
    return found


def render_counterexample(m: Model, lasso: Lasso) -> str:
    """One row per step: scheduler bit, inputs read, and state variables that change."""
    steps = list(lasso.stem) + list(lasso.loop)
    inputs = [v.name for v in m.inputs if v.name != SCHED]
    outs = [o for h in m.holes if h.role == "control" for o in h.outputs]
    rows = []
    first = steps[0]
    rows.append(("init", "", "", ", ".join(f"{n}={first[n]}" for n in m.state_names)))
    for k, g in enumerate(steps):
        nxt = steps[k + 1] if k + 1 < len(steps) else lasso.loop[0]
        mark = f"{k}" + ("*" if k == len(lasso.stem) else "")
        ins = ", ".join(f"{n}={g[n]}" for n in inputs + outs if n in g)
        changed = ", ".join(f"{n}:{g[n]}->{nxt[n]}" for n in m.state_names if g[n] != nxt[n])
        rows.append((mark, "p1" if g.get(SCHED, 0) else "p2", ins, changed or "-"))
    head = ("step", "sched", "inputs", "changes")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(3)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head[:3], widths)) + "  " + head[3]]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r[:3], widths)) + "  " + r[3])
    lines.append("(* marks the first step of the repeated loop)")
    return "\n".join(lines)
