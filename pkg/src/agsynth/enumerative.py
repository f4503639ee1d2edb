"""Solver-free decision procedure for encodings with small hole tables.

Every interpretation of the hole functions is tried.  For a fixed
interpretation the reachability flags and ranks exist iff no reachable
cycle of ranked transitions contains a strict transition, which is decided
with strongly connected components instead of searching for rank values.
"""

from __future__ import annotations

import itertools
import time

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .encoder import ConstraintSet
from .errors import BudgetExceeded
from .smt import SolverResult, entry_queries, _app_text, _bv
from .terms import Term, evaluate

DEFAULT_BUDGET = 1 << 16


class _Shape:
    """Transition graph extracted from the grounded implications."""

    def __init__(self, c: ConstraintSet):
        self.entries = entry_queries(c)
        self.entry_index = {(f.name, args): i for i, (f, args) in enumerate(self.entries)}
        self.node_index: dict[tuple, int] = {}
        self.initial: list[int] = []
        src, dst, ranked, strict = [], [], [], []
        lit_edge, lit_entry, lit_val = [], [], []
        self.other: list[Term] = []
        for a in c.assertions:
            if a.op == "app" and a.fun.role == "reach":
                self.initial.append(self._node(a))
                continue
            if a.op == "implies" and self._is_edge(a):
                lhs, rhs = a.args
                parts = list(lhs.args) if lhs.op == "and" else [lhs]
                reach = [x for x in parts if x.op == "app" and x.fun.role == "reach"]
                guards = [x for x in parts if not (x.op == "app" and x.fun.role == "reach")]
                e = len(src)
                src.append(self._node(reach[0]))
                for g in guards:
                    ent = self.entry_index[(g.args[0].fun.name, g.args[0].args)]
                    lit_edge.append(e)
                    lit_entry.append(ent)
                    lit_val.append(g.args[1].value)
                rparts = list(rhs.args) if rhs.op == "and" else [rhs]
                dst.append(self._node(next(x for x in rparts if x.op == "app")))
                cmp = [x for x in rparts if x.op in ("uge", "ugt")]
                ranked.append(bool(cmp))
                strict.append(bool(cmp) and cmp[0].op == "ugt")
                continue
            self.other.append(a)
        self.n_nodes = len(self.node_index) + 1  # last node is a virtual root
        self.root = self.n_nodes - 1
        self.src = np.array(src, dtype=np.int64)
        self.dst = np.array(dst, dtype=np.int64)
        self.ranked = np.array(ranked, dtype=bool)
        self.strict = np.array(strict, dtype=bool)
        self.lit_edge = np.array(lit_edge, dtype=np.int64)
        self.lit_entry = np.array(lit_entry, dtype=np.int64)
        self.lit_val = np.array(lit_val, dtype=np.int64)
        self.n_edges = len(src)

    def _node(self, t: Term) -> int:
        key = (t.fun.name, t.args)
        i = self.node_index.get(key)
        if i is None:
            i = len(self.node_index)
            self.node_index[key] = i
        return i

    @staticmethod
    def _is_edge(a: Term) -> bool:
        lhs, rhs = a.args
        parts = list(lhs.args) if lhs.op == "and" else [lhs]
        reach = [x for x in parts if x.op == "app" and x.fun.role == "reach"]
        if len(reach) != 1:
            return False
        for x in parts:
            if x is reach[0]:
                continue
            if not (x.op == "eq" and x.args[0].op == "app" and x.args[0].fun.role == "hole" and x.args[1].op == "const"):
                return False
        rparts = list(rhs.args) if rhs.op == "and" else [rhs]
        return any(x.op == "app" and x.fun.role == "reach" for x in rparts)

    def feasible(self, vals: np.ndarray) -> bool:
        if self.n_edges:
            ok = vals[self.lit_entry] == self.lit_val
            fails = np.bincount(self.lit_edge[~ok], minlength=self.n_edges)
            enabled = fails == 0
        else:
            enabled = np.zeros(0, dtype=bool)
        n = self.n_nodes
        s = np.concatenate([self.src[enabled], np.full(len(self.initial), self.root)])
        d = np.concatenate([self.dst[enabled], np.array(self.initial, dtype=np.int64)])
        g = csr_matrix((np.ones(len(s), dtype=np.int8), (s, d)), shape=(n, n))
        reach = np.zeros(n, dtype=bool)
        reach[breadth_first_order(g, self.root, directed=True, return_predecessors=False)] = True
        live = enabled & self.ranked & reach[self.src] if self.n_edges else enabled
        if not live.any() or not (live & self.strict).any():
            return True
        rs, rd = self.src[live], self.dst[live]
        rg = csr_matrix((np.ones(len(rs), dtype=np.int8), (rs, rd)), shape=(n, n))
        _, labels = connected_components(rg, directed=True, connection="strong")
        hot = live & self.strict
        return not np.any(labels[self.src[hot]] == labels[self.dst[hot]])


def enumerate_witnesses(c: ConstraintSet, budget: int = DEFAULT_BUDGET, limit: int | None = None):
    """Yield every satisfying hole interpretation as a list of entry values."""
    shape = _Shape(c)
    domains = [range(1 << f.result) for f, _ in shape.entries]
    total = 1
    for d in domains:
        total *= len(d)
    if total > budget:
        raise BudgetExceeded(f"{total} interpretations exceed the budget of {budget}")
    count = 0
    for combo in itertools.product(*domains):
        vals = np.array(combo, dtype=np.int64)
        if shape.other:
            interp: dict[str, dict] = {}
            for (f, args), v in zip(shape.entries, combo):
                interp.setdefault(f.name, {})[args] = v
            if not all(evaluate(t, interp) for t in shape.other):
                continue
        if shape.feasible(vals):
            yield shape.entries, list(combo)
            count += 1
            if limit is not None and count >= limit:
                return


def model_text(entries, vals) -> str:
    """Render an interpretation the way a solver answers ``get-value``."""
    pairs = [f"({_app_text(f, args)} {_bv(v, f.result)})" for (f, args), v in zip(entries, vals)]
    return "(" + " ".join(pairs) + ")"


def enumerative_check_sat(c: ConstraintSet, budget: int = DEFAULT_BUDGET) -> SolverResult:
    """Decide ``c`` by enumeration; ``witnesses`` counts satisfying interpretations."""
    start = time.monotonic()
    first = None
    count = 0
    for entries, vals in enumerate_witnesses(c, budget):
        if first is None:
            first = model_text(entries, vals)
        count += 1
    dur = time.monotonic() - start
    if count:
        return SolverResult("sat", first, dur, "enumerative", witnesses=count)
    return SolverResult("unsat", None, dur, "enumerative", witnesses=0)
