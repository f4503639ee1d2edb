"""Bounded-synthesis constraints for sketches.

For every pair (q, v) of an automaton state and an extended state valuation
the encoding has a reachability flag ``lb(q, v)`` and a rank ``ln(q, v)``.
Each product transition contributes

    lb(q, v) and guards  ->  lb(q', v') and ln(q', v') >= ln(q, v)

with ``>`` when q' is rejecting, where the guards fix the values of the
hole entries that the transition depends on.  Hole functions are shared by
all instances of a mode; flags and ranks are private to each instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import UCW, _tarjan, translate_to_ucw
from .checker import instance_specs
from .errors import BudgetExceeded
from .expr import compile_expr
from .ltl import Formula
from .problem import CostDecl, StrategyTables, SynthesisProblem, pack, unpack
from .semantics import HoleInfo, Model
from .terms import (
    FALSE_T,
    TRUE_T,
    FunDecl,
    Term,
    add,
    and_,
    app,
    bv,
    eq,
    implies,
    ite,
    or_,
    uge,
    ugt,
    ult,
)

DEFAULT_PRODUCT_BUDGET = 2_000_000


@dataclass(frozen=True)
class ProductDomain:
    ucw: UCW
    model: Model
    initial: tuple[int, tuple[int, ...]]

    @property
    def n_valuations(self) -> int:
        return 1 << self.model.state_bits

    @property
    def size(self) -> int:
        return self.ucw.n_states * self.n_valuations

    @property
    def input_names(self) -> tuple[str, ...]:
        return self.model.input_names + ("sched",)

    @property
    def rank_bound(self) -> int:
        return self.size + 1


@dataclass
class ConstraintSet:
    decls: list[FunDecl] = field(default_factory=list)
    assertions: list[Term] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def declare(self, f: FunDecl) -> FunDecl:
        for g in self.decls:
            if g.name == f.name:
                if g != f:
                    raise ValueError(f"conflicting declarations of {f.name}")
                return g
        self.decls.append(f)
        return f

    def extend(self, other: "ConstraintSet") -> "ConstraintSet":
        for f in other.decls:
            self.declare(f)
        self.assertions.extend(other.assertions)
        tags = self.meta.setdefault("tags", [])
        for t in other.meta.get("tags", []):
            if t not in tags:
                tags.append(t)
        for k, v in other.meta.items():
            if k != "tags":
                self.meta.setdefault(k, v)
        return self

    def hole_decls(self) -> list[FunDecl]:
        return [f for f in self.decls if f.role == "hole"]


def build_product_domain(p: SynthesisProblem, b: int, spec: Formula, ucw: UCW | None = None) -> ProductDomain:
    m = p.at_bound(b)
    a = ucw if ucw is not None else translate_to_ucw(spec)
    return ProductDomain(a, m, (a.initial, m.init))


def _width(n: int) -> int:
    return max(1, (n - 1).bit_length())


def hole_decl(h: HoleInfo) -> FunDecl:
    args = (h.in_width,) if h.in_width > 0 else ()
    return FunDecl(f"h_{h.name}", args, h.out_width, "hole", h.name)


def hole_app(h: HoleInfo, row: int) -> Term:
    f = hole_decl(h)
    return app(f, row) if f.arg_widths else app(f)


def encode_instance(
    p: SynthesisProblem,
    b: int,
    spec: Formula,
    refined: Sequence[int],
    tag: str = "x",
    exhaustive: bool = False,
    ucw: UCW | None = None,
    budget: int = DEFAULT_PRODUCT_BUDGET,
) -> ConstraintSet:
    """Constraints stating that the refined composition satisfies ``spec``.

    By default only product pairs reachable in the guard-free product are
    grounded, and ranks are kept only inside strongly connected parts that
    contain a rejecting transition.  ``exhaustive`` grounds every pair and
    every rank constraint.
    """
    dom = build_product_domain(p, b, spec, ucw)
    m, a = dom.model, dom.ucw
    modes = m.hole_modes(refined)
    atoms = tuple(sorted(a.atoms))
    qw = _width(a.n_states)
    sw = max(1, m.state_bits)
    rw = _width(dom.rank_bound)
    lb = FunDecl(f"lb_{tag}", (qw, sw), 0, "reach", tag)
    ln = FunDecl(f"ln_{tag}", (qw, sw), rw, "rank", tag)
    cs = ConstraintSet(meta={"tags": [tag], "bound": b})
    for h in m.holes:
        cs.declare(hole_decl(h))
    cs.declare(lb)
    cs.declare(ln)

    cases_of: dict[tuple, list] = {}
    succ_cache: dict[tuple, tuple[int, ...]] = {}

    def cases(st):
        c = cases_of.get(st)
        if c is None:
            c = m.expand_step(st, modes, None, atoms)
            cases_of[st] = c
        return c

    def succs(q, letter):
        key = (q, letter)
        r = succ_cache.get(key)
        if r is None:
            r = tuple(sorted(a.successors(q, dict(zip(atoms, letter)))))
            succ_cache[key] = r
        return r

    init = dom.initial
    index: dict[tuple, int] = {}
    nodes: list[tuple] = []
    if exhaustive:
        for q in range(a.n_states):
            for st in m.all_states():
                index[(q, st)] = len(nodes)
                nodes.append((q, st))
    else:
        index[init] = 0
        nodes.append(init)
    edges: list[list[tuple[int, tuple, bool]]] = []
    i = 0
    while i < len(nodes):
        q, st = nodes[i]
        out: dict[tuple, None] = {}
        for c in cases(st):
            for q2 in succs(q, c.letter):
                node = (q2, c.succ)
                j = index.get(node)
                if j is None:
                    if len(nodes) >= budget:
                        raise BudgetExceeded(f"product exceeds {budget} pairs")
                    j = len(nodes)
                    index[node] = j
                    nodes.append(node)
                out[(j, c.guards, q2 in a.rejecting)] = None
        edges.append(list(out))
        i += 1

    n = len(nodes)
    ranked_edge = [[exhaustive] * len(edges[k]) for k in range(n)]
    if not exhaustive:
        comp_of = [0] * n
        comps = _tarjan(n, {k: [e[0] for e in edges[k]] for k in range(n)})
        for ci, comp in enumerate(comps):
            for x in comp:
                comp_of[x] = ci
        hot = set()
        for k in range(n):
            for j, _, strict in edges[k]:
                if strict and comp_of[j] == comp_of[k]:
                    hot.add(comp_of[k])
        for k in range(n):
            ck = comp_of[k]
            if ck in hot:
                ranked_edge[k] = [comp_of[j] == ck for j, _, _ in edges[k]]

    def key(node):
        q, st = node
        return (q, pack(st, m.state_widths))

    def lb_t(node):
        return app(lb, *key(node))

    def ln_t(node):
        return app(ln, *key(node))

    cs.assertions.append(lb_t(init))
    emitted = 0
    for k in sorted(range(n), key=lambda x: key(nodes[x])):
        src = nodes[k]
        for (j, guards, strict), ranked in zip(edges[k], ranked_edge[k]):
            dst = nodes[j]
            lhs = and_(lb_t(src), *[eq(hole_app(m.hole_info[h], row), bv(val, m.hole_info[h].out_width)) for h, row, val in guards])
            if ranked:
                cmp = ugt(ln_t(dst), ln_t(src)) if strict else uge(ln_t(dst), ln_t(src))
                rhs = and_(lb_t(dst), cmp)
            else:
                rhs = lb_t(dst)
            cs.assertions.append(implies(lhs, rhs))
            emitted += 1
    cs.meta["stats"] = {tag: {"ucw_states": a.n_states, "pairs": n, "constraints": emitted}}
    return cs


def encode_mode(
    p: SynthesisProblem,
    b: int,
    mode: str,
    exhaustive: bool = False,
    budget: int = DEFAULT_PRODUCT_BUDGET,
) -> ConstraintSet:
    cs = ConstraintSet(meta={"mode": mode, "bound": b, "tags": []})
    m = p.at_bound(b)
    for h in m.holes:
        cs.declare(hole_decl(h))
    stats = {}
    for tag, f, refined in instance_specs(p, mode):
        part = encode_instance(p, b, f, refined, tag, exhaustive=exhaustive, budget=budget)
        stats.update(part.meta.get("stats", {}))
        cs.extend(part)
    cs.meta["mode"] = mode
    cs.meta["stats"] = stats
    cs.meta["problem"] = p.name
    return cs


# ---------------------------------------------------------------- costs


def cost_matrix(m: Model, c: CostDecl) -> list[list[bool]] | None:
    """``M[row][value]``: whether the predicate holds for that table entry."""
    h = m.hole_info.get(c.hole)
    if h is None:
        return None
    env = {}
    for o, w in zip(h.observes, h.obs_widths):
        env[o] = m.env.get(o, w)
    for o, w in zip(h.outputs, h.out_widths):
        env[o + "'"] = m.env.get(o, w)
    if len(h.outputs) == 1:
        env["?" + h.name] = m.env.get(h.outputs[0], h.out_widths[0])
    fn = compile_expr(c.predicate, env, 0)
    out = []
    for row in range(h.rows):
        ins = dict(zip(h.observes, unpack(row, h.obs_widths)))
        line = []
        for val in range(1 << h.out_width):
            outs = unpack(val, h.out_widths)
            look = dict(ins)
            for o, x in zip(h.outputs, outs):
                look[o + "'"] = x
            if len(h.outputs) == 1:
                look["?" + h.name] = val
            line.append(bool(fn(look.__getitem__)))
        out.append(line)
    return out


def max_cost(m: Model, costs: Iterable[CostDecl]) -> int:
    total = 0
    for c in costs:
        mat = cost_matrix(m, c)
        if mat is not None:
            total += c.weight * sum(1 for r in mat if any(r))
    return total


def evaluate_cost(p: SynthesisProblem, t: StrategyTables, costs: Iterable[CostDecl] | None = None) -> int:
    m = p.at_bound(t.bound)
    costs = p.costs if costs is None else costs
    total = 0
    for c in costs:
        mat = cost_matrix(m, c)
        if mat is None:
            continue
        tab = t[c.hole]
        total += c.weight * sum(1 for row, val in enumerate(tab) if mat[row][val])
    return total


def encode_cost(p: SynthesisProblem, b: int, costs: Sequence[CostDecl], opt: int) -> ConstraintSet:
    """Assert that the weighted cost of the hole tables is below ``opt``."""
    if opt < 1:
        raise ValueError("opt must be at least 1")
    m = p.at_bound(b)
    cw = max(_width(max_cost(m, costs) + 1), _width(opt + 1)) + 1
    terms = []
    cs = ConstraintSet(meta={"tags": ["cost"], "opt": opt})
    for c in costs:
        mat = cost_matrix(m, c)
        if mat is None:
            continue
        h = m.hole_info[c.hole]
        cs.declare(hole_decl(h))
        for row, line in enumerate(mat):
            vals = [v for v, ok in enumerate(line) if ok]
            if not vals:
                continue
            if len(vals) == len(line):
                terms.append(bv(c.weight, cw))
                continue
            cond = or_(*[eq(hole_app(h, row), bv(v, h.out_width)) for v in vals])
            terms.append(ite(cond, bv(c.weight, cw), bv(0, cw)))
    if not terms:
        total = bv(0, cw)
    elif len(terms) == 1:
        total = terms[0]
    else:
        total = add(*terms)
    cs.assertions.append(ult(total, bv(opt, cw)))
    return cs


__all__ = [
    "ProductDomain",
    "ConstraintSet",
    "build_product_domain",
    "encode_instance",
    "encode_mode",
    "encode_cost",
    "evaluate_cost",
    "cost_matrix",
    "TRUE_T",
    "FALSE_T",
]
