"""LTL to universal co-Büchi automata.

A tableau construction produces a transition-based generalized Büchi
automaton for the negated formula.  It is degeneralized, trimmed and
quotiented by direct bisimulation; the accepting states of that Büchi
automaton become the rejecting states of the co-Büchi automaton.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import BudgetExceeded
from .ltl import FALSE, TRUE, And, Atom, Formula, Lasso, Not, Or, to_nnf

DEFAULT_STATE_BUDGET = 10_000

# a literal is (atom name, polarity); a cube is a frozenset of literals and a
# label is a frozenset of cubes read as a disjunction
Cube = frozenset
Label = frozenset


@dataclass(frozen=True)
class UCW:
    """Universal co-Büchi automaton with propositional edge labels.

    States are ``0 .. n_states-1``.  ``edges`` holds ``(src, label, dst)``
    triples with at most one triple per ``(src, dst)`` pair.
    """

    n_states: int
    initial: int
    edges: tuple[tuple[int, Formula, int], ...]
    rejecting: frozenset[int]
    atoms: frozenset[str]
    cubes: tuple[tuple[tuple[Cube, ...], int], ...] = field(repr=False, compare=False, default=())
    by_src: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    @property
    def states(self) -> range:
        return range(self.n_states)

    def successors(self, q: int, letter: Mapping[str, bool]) -> frozenset[int]:
        out = set()
        for ei in self.by_src[q]:
            cubes, dst = self.cubes[ei]
            if dst not in out and _label_holds(cubes, letter):
                out.add(dst)
        return frozenset(out)

    def to_dot(self, name: str = "ucw") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
        for q in self.states:
            shape = "doublecircle" if q in self.rejecting else "circle"
            lines.append(f'  q{q} [shape={shape}, label="q{q}"];')
        lines.append(f"  init -> q{self.initial};")
        for src, label, dst in self.edges:
            text = str(label).replace('"', '\\"')
            lines.append(f'  q{src} -> q{dst} [label="{text}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label_holds(cubes: Iterable[Cube], letter: Mapping[str, bool]) -> bool:
    for cube in cubes:
        if all(bool(letter[a]) == pol for a, pol in cube):
            return True
    return False


def ucw_successors(a: UCW, q: int, v: Mapping[str, bool]) -> frozenset[int]:
    return a.successors(q, v)


# ---------------------------------------------------------------- tableau


def _is_literal(f: Formula) -> bool:
    return f.op == "atom" or (f.op == "not" and f.args[0].op == "atom")


def _lit(f: Formula) -> tuple[str, bool]:
    if f.op == "atom":
        return (f.name, True)
    return (f.args[0].name, False)


def _covers(state: frozenset[Formula]) -> list[tuple[frozenset, frozenset, frozenset]]:
    """Expand a set of obligations into (literals, next-obligations, postponed untils)."""
    out: list[tuple[frozenset, frozenset, frozenset]] = []

    def expand(todo: list[Formula], lits: frozenset, nxt: frozenset, post: frozenset, seen: frozenset):
        while todo:
            f = todo[0]
            if f in seen:
                todo = todo[1:]
                continue
            break
        if not todo:
            out.append((lits, nxt, post))
            return
        f, rest = todo[0], todo[1:]
        seen = seen | {f}
        op = f.op
        if op == "true":
            expand(rest, lits, nxt, post, seen)
        elif op == "false":
            return
        elif _is_literal(f):
            name, pol = _lit(f)
            if (name, not pol) in lits:
                return
            expand(rest, lits | {(name, pol)}, nxt, post, seen)
        elif op == "and":
            expand(list(f.args) + rest, lits, nxt, post, seen)
        elif op == "or":
            for a in f.args:
                expand([a] + rest, lits, nxt, post, seen)
        elif op == "next":
            expand(rest, lits, nxt | {f.args[0]}, post, seen)
        elif op == "until":
            a, b = f.args
            expand([b] + rest, lits, nxt, post, seen)
            expand([a] + rest, lits, nxt | {f}, post | {f}, seen)
        elif op == "release":
            a, b = f.args
            expand([a, b] + rest, lits, nxt, post, seen)
            expand([b] + rest, lits, nxt | {f}, post, seen)
        else:
            raise ValueError(f"formula not in negation normal form: {op}")

    expand(sorted(state, key=_fkey), frozenset(), frozenset(), frozenset(), frozenset())
    # drop covers dominated by a more permissive one
    uniq = list(dict.fromkeys(out))
    kept = []
    for i, c in enumerate(uniq):
        dominated = False
        for j, d in enumerate(uniq):
            if i != j and d[0] <= c[0] and d[1] <= c[1] and d[2] <= c[2] and (d != c):
                dominated = True
                break
        if not dominated:
            kept.append(c)
    return kept


_key_cache: dict[Formula, str] = {}


def _fkey(f: Formula) -> str:
    k = _key_cache.get(f)
    if k is None:
        k = repr(f)
        _key_cache[f] = k
    return k


def _untils(f: Formula, acc: list[Formula]) -> None:
    for a in f.args:
        _untils(a, acc)
    if f.op == "until" and f not in acc:
        acc.append(f)


def translate_to_ucw(f: Formula, budget: int = DEFAULT_STATE_BUDGET) -> UCW:
    """UCW accepting exactly the words that satisfy ``f``."""
    neg = to_nnf(Not(f))
    untils: list[Formula] = []
    _untils(neg, untils)
    m = len(untils)

    # generalized automaton: states are obligation sets
    init = frozenset([neg])
    index: dict[frozenset, int] = {init: 0}
    order = [init]
    tg_edges: dict[tuple[int, int, frozenset], set] = {}
    work = deque([init])
    while work:
        st = work.popleft()
        src = index[st]
        for lits, nxt, post in _covers(st):
            if nxt not in index:
                if len(index) >= budget:
                    raise BudgetExceeded(f"automaton exceeds {budget} states")
                index[nxt] = len(order)
                order.append(nxt)
                work.append(nxt)
            marks = frozenset(i for i, u in enumerate(untils) if u not in post)
            tg_edges.setdefault((src, index[nxt], marks), set()).add(frozenset(lits))

    # degeneralize: level l waits for mark l; level m is accepting and resets
    def next_level(level: int, marks: frozenset) -> int:
        if level == m:
            level = 0
        while level < m and level in marks:
            level += 1
        return level

    out_tg: dict[int, list[tuple[int, frozenset, frozenset]]] = {}
    for (src, dst, marks), cubes in tg_edges.items():
        out_tg.setdefault(src, []).append((dst, marks, frozenset(cubes)))
    for lst in out_tg.values():
        lst.sort(key=lambda e: (e[0], sorted(e[1]), _label_key(e[2])))

    start = (0, 0 if m > 0 else 0)
    ba_index: dict[tuple[int, int], int] = {start: 0}
    ba_order = [start]
    ba_edges: dict[tuple[int, int], set] = {}
    work2 = deque([start])
    while work2:
        node = work2.popleft()
        s, level = node
        for dst, marks, cubes in out_tg.get(s, []):
            nl = next_level(level, marks) if m > 0 else 0
            tgt = (dst, nl)
            if tgt not in ba_index:
                if len(ba_index) >= budget:
                    raise BudgetExceeded(f"automaton exceeds {budget} states")
                ba_index[tgt] = len(ba_order)
                ba_order.append(tgt)
                work2.append(tgt)
            ba_edges.setdefault((ba_index[node], ba_index[tgt]), set()).update(cubes)
    accepting = {i for i, (_, lv) in enumerate(ba_order) if lv == m}

    n = len(ba_order)
    succ: dict[int, dict[int, frozenset]] = {i: {} for i in range(n)}
    for (a, b), cubes in ba_edges.items():
        succ[a][b] = _simplify_label(frozenset(cubes))
    n, succ, accepting = _trim(n, succ, accepting)
    n, succ, accepting = _quotient(n, succ, accepting)
    return _build(n, succ, accepting, f.atoms())


def _label_key(cubes: frozenset) -> list:
    return sorted(sorted(c) for c in cubes)


def _simplify_label(cubes: frozenset) -> frozenset:
    # absorption: drop cubes that contain another cube
    cl = sorted(cubes, key=len)
    kept: list[frozenset] = []
    for c in cl:
        if not any(k <= c for k in kept):
            kept.append(c)
    # merge pairs that differ in the polarity of one literal
    changed = True
    while changed:
        changed = False
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                a, b = kept[i], kept[j]
                d = a ^ b
                if len(a) == len(b) and len(d) == 2:
                    (n1, p1), (n2, p2) = sorted(d)
                    if n1 == n2 and p1 != p2:
                        merged = a & b
                        kept = [k for t, k in enumerate(kept) if t not in (i, j)]
                        kept = [k for k in kept if not merged <= k] + [merged]
                        changed = True
                        break
            if changed:
                break
    return frozenset(kept)


def _tarjan(n: int, succ: Mapping[int, Iterable[int]]) -> list[list[int]]:
    """Strongly connected components (iterative Tarjan)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _trim(n: int, succ: dict[int, dict[int, frozenset]], accepting: set[int]):
    """Keep states that can reach an accepting cycle; state 0 always survives."""
    comps = _tarjan(n, {i: list(succ[i]) for i in range(n)})
    good: set[int] = set()
    for comp in comps:
        cs = set(comp)
        cyclic = len(comp) > 1 or comp[0] in succ[comp[0]]
        if cyclic and cs & accepting:
            good |= cs
    pred: dict[int, list[int]] = {i: [] for i in range(n)}
    for a in range(n):
        for b in succ[a]:
            pred[b].append(a)
    work = deque(good)
    while work:
        v = work.popleft()
        for u in pred[v]:
            if u not in good:
                good.add(u)
                work.append(u)
    cyclic_states: set[int] = set()
    for comp in comps:
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            cyclic_states |= set(comp)
    # acceptance only matters on cycles
    accepting = accepting & cyclic_states & good
    keep = [0] + sorted(x for x in good if x != 0)
    ren = {old: new for new, old in enumerate(keep)}
    nsucc = {ren[a]: {ren[b]: lab for b, lab in succ[a].items() if b in ren} for a in keep}
    nacc = {ren[a] for a in accepting if a in ren}
    return len(keep), nsucc, nacc


def _quotient(n: int, succ: dict[int, dict[int, frozenset]], accepting: set[int]):
    """Merge states that are directly bisimilar (same acceptance, same moves)."""
    block = [1 if i in accepting else 0 for i in range(n)]
    while True:
        sigs: dict[tuple, int] = {}
        nb = []
        for i in range(n):
            moves: dict[int, set] = {}
            for j, lab in succ[i].items():
                moves.setdefault(block[j], set()).update(lab)
            sig = (block[i], frozenset((b, _simplify_label(frozenset(c))) for b, c in moves.items()))
            nb.append(sigs.setdefault(sig, len(sigs)))
        if len(set(nb)) == len(set(block)):
            break
        block = nb
    # renumber blocks so that the initial state's block is 0, then by first member
    ren: dict[int, int] = {block[0]: 0}
    for i in range(n):
        ren.setdefault(block[i], len(ren))
    nsucc: dict[int, dict[int, set]] = {k: {} for k in range(len(ren))}
    for i in range(n):
        for j, lab in succ[i].items():
            nsucc[ren[block[i]]].setdefault(ren[block[j]], set()).update(lab)
    fsucc = {a: {b: _simplify_label(frozenset(c)) for b, c in d.items()} for a, d in nsucc.items()}
    nacc = {ren[block[i]] for i in accepting}
    return len(ren), fsucc, nacc


def _label_formula(cubes: frozenset) -> Formula:
    if not cubes:
        return FALSE
    terms = []
    for cube in sorted(cubes, key=lambda c: (len(c), sorted(c))):
        lits = [Atom(a) if pol else Not(Atom(a)) for a, pol in sorted(cube)]
        terms.append(And(*lits) if lits else TRUE)
    return Or(*terms)


def _build(n: int, succ: dict[int, dict[int, frozenset]], accepting: set[int], atoms: frozenset[str]) -> UCW:
    edges = []
    cube_list = []
    by_src: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        for b in sorted(succ[a]):
            lab = succ[a][b]
            if not lab:
                continue
            by_src[a].append(len(edges))
            edges.append((a, _label_formula(lab), b))
            cube_list.append((tuple(sorted(lab, key=lambda c: sorted(c))), b))
    return UCW(
        n_states=n,
        initial=0,
        edges=tuple(edges),
        rejecting=frozenset(accepting),
        atoms=frozenset(atoms),
        cubes=tuple(cube_list),
        by_src=tuple(tuple(x) for x in by_src),
    )


# ---------------------------------------------------------------- lassos


def accepts_lasso(a: UCW, w: Lasso) -> bool:
    """True iff no run of ``a`` on ``w`` visits a rejecting state infinitely often."""
    letters = w.positions()
    nodes: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []
    succ: dict[int, list[int]] = {}
    start = (a.initial, 0)
    nodes[start] = 0
    order.append(start)
    work = deque([start])
    while work:
        q, i = work.popleft()
        me = nodes[(q, i)]
        succ[me] = []
        j = w.successor(i)
        for q2 in sorted(a.successors(q, letters[i])):
            node = (q2, j)
            if node not in nodes:
                nodes[node] = len(order)
                order.append(node)
                work.append(node)
            succ[me].append(nodes[node])
    for comp in _tarjan(len(order), succ):
        cyclic = len(comp) > 1 or comp[0] in succ[comp[0]]
        if cyclic and any(order[x][0] in a.rejecting for x in comp):
            return False
    return True
