"""Bound loop, cost descent, solution files and problem rewriting."""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .checker import AgsReport, CONDITION_TAGS, check_solution
from .dsl import parse_problem, render_problem
from .encoder import ConstraintSet, encode_cost, encode_mode, evaluate_cost
from .enumerative import enumerative_check_sat
from .errors import InternalError, SemanticError
from .expr import BOOL, Binary, Const, Expr, HoleRef, Ite, Name, parse_expr, substitute
from .ltl import Formula, parse_ltl
from .minimize import bit_names, minimize_expression, output_bit_tables
from .problem import MODE_ALIASES, MODES, StrategyTables, SynthesisProblem
from .semantics import HoleInfo, Model
from .smt import SolverConfig, SolverResult, artifact_name, emit_script, extract_tables, solve

log = logging.getLogger("agsynth")

BACKENDS = ("smt", "enumerative")
SEARCHES = ("descent", "binary")


@dataclass(frozen=True)
class RunConfig:
    mode: str | None = None  # None: the mode named in the problem file
    max_bound: int = 3
    opt_range: tuple[int, int] | None = None
    solver: SolverConfig = SolverConfig()
    out: str | None = None
    verbosity: int = 0
    backend: str = "smt"
    search: str = "descent"
    exhaustive: bool = False
    jobs: int = 1  # >1 solves consecutive bounds concurrently
    enum_budget: int = 1 << 16

    def __post_init__(self):
        if self.max_bound < 0:
            raise ValueError("max_bound must be non-negative")
        if self.opt_range is not None:
            lo, hi = self.opt_range
            if lo < 1 or lo > hi:
                raise ValueError(f"bad optimization range {lo}..{hi}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.search not in SEARCHES:
            raise ValueError(f"unknown search {self.search!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


@dataclass(frozen=True)
class Attempt:
    bound: int
    status: str
    duration: float
    opt: int | None = None


@dataclass(frozen=True)
class Solution:
    tables: StrategyTables
    expressions: dict  # hole -> {output or output bit: expression text}
    bound: int
    opt: int | None
    cost: int | None
    durations: tuple[tuple[str, float], ...]
    report: AgsReport
    opt_trace: tuple[int, ...] = ()

    @property
    def mode(self) -> str:
        return self.tables.mode


@dataclass(frozen=True)
class Unrealizable:
    """No solution up to ``max_bound``; says nothing about larger bounds."""

    max_bound: int
    attempts: tuple[Attempt, ...] = ()

    @property
    def inconclusive(self) -> bool:
        return any(a.status not in ("sat", "unsat") for a in self.attempts)


def resolve_mode(p: SynthesisProblem, mode: str | None) -> str:
    m = mode or p.mode
    m = MODE_ALIASES.get(m, m)
    if m not in MODES:
        raise SemanticError(f"unknown mode {m!r}")
    return m


# ---------------------------------------------------------------- solving


def _solve(cs: ConstraintSet, cfg: RunConfig, artifact: str) -> SolverResult:
    if cfg.backend == "enumerative":
        return enumerative_check_sat(cs, cfg.enum_budget)
    return solve(emit_script(cs), cfg.solver, artifact)


def _attempt(p: SynthesisProblem, b: int, mode: str, cfg: RunConfig, opt: int | None):
    t0 = time.monotonic()
    cs = encode_mode(p, b, mode, exhaustive=cfg.exhaustive)
    if opt is not None and p.costs:
        cs.extend(encode_cost(p, b, p.costs, opt))
    t_enc = time.monotonic() - t0
    tag = mode if opt is None else f"{mode}.opt{opt}"
    r = _solve(cs, cfg, artifact_name(p.name, tag, b))
    log.info("bound %d mode %s opt %s: %s in %.2fs (encode %.2fs)", b, mode, opt, r.status, r.duration, t_enc)
    return r, t_enc


def _verified(p: SynthesisProblem, r: SolverResult, b: int, mode: str) -> tuple[StrategyTables, AgsReport, float]:
    t = extract_tables(r, p, b, mode)
    t0 = time.monotonic()
    rep = check_solution(p, t, mode)
    if not rep.valid:
        bad = rep.first_violation()
        raise InternalError(f"solver model fails condition ({bad.tag}) on re-check at bound {b}")
    return t, rep, time.monotonic() - t0


def synthesize(p: SynthesisProblem, cfg: RunConfig = RunConfig()) -> Solution | Unrealizable:
    """Search bounds 0..max_bound for a verified solution, then optimize if asked."""
    mode = resolve_mode(p, cfg.mode)
    opt0 = cfg.opt_range[1] if cfg.opt_range and p.costs else None
    attempts: list[Attempt] = []
    bounds = list(range(cfg.max_bound + 1))

    found = None
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(lambda b: (b, _attempt(p, b, mode, cfg, opt0)), bounds))
        for b, (r, t_enc) in results:
            attempts.append(Attempt(b, r.status, r.duration, opt0))
            if r.status == "sat" and found is None:
                found = (b, r, t_enc)
    else:
        for b in bounds:
            r, t_enc = _attempt(p, b, mode, cfg, opt0)
            attempts.append(Attempt(b, r.status, r.duration, opt0))
            if r.status == "sat":
                found = (b, r, t_enc)
                break
    if found is None:
        return Unrealizable(cfg.max_bound, tuple(attempts))
    b, r, t_enc = found
    tables, rep, t_chk = _verified(p, r, b, mode)
    durations = [("encode", t_enc), ("solve", r.duration), ("check", t_chk)]
    sol = make_solution(p, tables, rep, durations=durations)
    if opt0 is not None:
        sol = optimize(p, cfg, sol)
    return sol


def optimize(p: SynthesisProblem, cfg: RunConfig, start: Solution) -> Solution:
    """Lower the cost bound until the solver gives up; returns the cheapest verified solution.

    After a solution of cost ``c`` the next bound tried is ``c`` itself, so
    every tried bound is strictly below the previous one.
    """
    if not p.costs:
        return start
    lo = cfg.opt_range[0] if cfg.opt_range else 1
    mode, b = start.mode, start.bound
    best = start
    cost = evaluate_cost(p, best.tables)
    trace = list(start.opt_trace) or ([cfg.opt_range[1]] if cfg.opt_range else [])
    durations = list(start.durations)

    def attempt(opt: int):
        r, t_enc = _attempt(p, b, mode, cfg, opt)
        durations.append((f"opt{opt}", t_enc + r.duration))
        trace.append(opt)
        if r.status != "sat":
            return None
        t, rep, t_chk = _verified(p, r, b, mode)
        return t, rep

    if cfg.search == "binary":
        # invariant: cost < hi is achievable, cost < lo' for lo' < lo is not tried
        left, hi = lo, cost
        while left <= hi and hi >= 1:
            mid = (left + hi + 1) // 2
            got = attempt(mid)
            if got is None:
                hi = mid - 1
                continue
            t, rep = got
            best = dataclasses.replace(best, tables=t, report=rep)
            cost = evaluate_cost(p, t)
            hi = min(cost, mid - 1)
    else:
        opt = cost
        while opt >= max(lo, 1):
            got = attempt(opt)
            if got is None:
                break
            t, rep = got
            new_cost = evaluate_cost(p, t)
            if new_cost >= opt:
                raise InternalError(f"cost {new_cost} violates the bound {opt}")
            best = dataclasses.replace(best, tables=t, report=rep)
            cost = new_cost
            opt = cost
    return make_solution(p, best.tables, best.report, opt=cost + 1, durations=durations, opt_trace=trace)


# ---------------------------------------------------------------- rendering


def _bool_names(m: Model) -> set[str]:
    return {k for k, v in m.env.items() if v == BOOL}


def hole_expressions(m: Model, h: HoleInfo, table: Sequence[int]) -> dict[str, str]:
    """Minimized expression per output (per output bit for multi-bit outputs)."""
    names = bit_names(h.observes, h.obs_widths, _bool_names(m))
    bools = _bool_names(m)
    bits = output_bit_tables(table, h.out_widths)
    out = {}
    k = 0
    for o, w in zip(h.outputs, h.out_widths):
        for i in reversed(range(w)):
            key = o if (w == 1 and o in bools) else f"{o}[{i}]"
            out[key] = minimize_expression(bits[k], names)
            k += 1
    return out


def make_solution(
    p: SynthesisProblem,
    tables: StrategyTables,
    report: AgsReport,
    opt: int | None = None,
    durations: Sequence[tuple[str, float]] = (),
    opt_trace: Sequence[int] = (),
) -> Solution:
    m = p.at_bound(tables.bound)
    exprs = {h.name: hole_expressions(m, h, tables[h.name]) for h in m.holes}
    cost = evaluate_cost(p, tables) if p.costs else None
    return Solution(tables, exprs, tables.bound, opt, cost, tuple(durations), report, tuple(opt_trace))


BIT_ORDER = (
    "row r lists the observations in the given order, each value written MSB first and "
    "concatenated, so the first observation is most significant; outputs pack the same way"
)


def solution_to_json(p: SynthesisProblem, s: Solution) -> dict:
    m = p.at_bound(s.bound)
    holes = {}
    for h in m.holes:
        holes[h.name] = {
            "owner": f"p{h.owner}",
            "role": h.role,
            "observes": list(h.observes),
            "observe_widths": list(h.obs_widths),
            "outputs": list(h.outputs),
            "output_widths": list(h.out_widths),
            "table": list(s.tables[h.name]),
            "bits": [format(x, f"0{h.out_width}b") for x in s.tables[h.name]],
            "expressions": s.expressions.get(h.name, {}),
        }
    return {
        "problem": p.name,
        "mode": s.mode,
        "bound": s.bound,
        "opt": s.opt,
        "cost": s.cost,
        "opt_trace": list(s.opt_trace),
        "bit_order": BIT_ORDER,
        "durations": {k: round(v, 4) for k, v in s.durations},
        "holes": holes,
        "report": {
            "valid": s.report.valid,
            "conditions": [{"tag": v.tag, "holds": v.holds, "vacuous": v.vacuous} for v in s.report.verdicts],
        },
    }


def save_solution(p: SynthesisProblem, s: Solution, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_json(p, s), fh, indent=2)
        fh.write("\n")


def tables_from_json(data: dict) -> StrategyTables:
    try:
        tabs = {name: [int(x) for x in h["table"]] for name, h in data["holes"].items()}
        return StrategyTables.of(tabs, int(data.get("bound", 0)), data.get("mode", "ags"))
    except (AttributeError, KeyError, TypeError, ValueError) as err:
        raise SemanticError(f"malformed solution data: {err!r}") from None


def load_tables(path: str) -> StrategyTables:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise SemanticError(f"{path}: not a solution file ({err})") from None
    if not isinstance(data, dict) or "holes" not in data:
        raise SemanticError(f"{path}: not a solution file")
    return tables_from_json(data)


# ---------------------------------------------------------------- rewriting


def _output_expr(m: Model, h: HoleInfo, exprs: dict[str, str], o: str, w: int) -> Expr:
    if o in exprs:
        return parse_expr(exprs[o])
    acc: Expr | None = None
    for i in range(w):
        term = Ite(parse_expr(exprs[f"{o}[{i}]"]), Const(1 << i, False), Const(0, False))
        acc = term if acc is None else Binary("+", acc, term)
    return acc


def freeze_holes(p: SynthesisProblem, tables: StrategyTables, process: int) -> SynthesisProblem:
    """Replace the control holes of ``process`` by the expressions of their tables.

    The rewritten problem is rendered and parsed again, so it passes the
    same checks as a hand-written file.
    """
    m = p.at_bound(tables.bound)
    mine = [h for h in m.holes if h.owner == process]
    if any(h.role == "memory" for h in mine):
        raise SemanticError("holes with memory updates cannot be frozen")
    repl: dict[str, Expr] = {}
    for h in mine:
        exprs = hole_expressions(m, h, tables[h.name])
        for o, w in zip(h.outputs, h.out_widths):
            repl[o] = _output_expr(m, h, exprs, o, w)
        if len(h.outputs) == 1:
            repl["?" + h.name] = repl[h.outputs[0]]
    gone = {h.name for h in mine}
    outs = {o for h in mine for o in h.outputs}

    def fn(e: Expr):
        if isinstance(e, HoleRef) and "?" + e.hole in repl:
            return repl["?" + e.hole]
        if isinstance(e, Name) and not e.primed and e.ident in repl:
            return repl[e.ident]
        return None

    procs = tuple(
        dataclasses.replace(
            pr,
            inputs=tuple(i for i in pr.inputs if i not in outs),
            assignments=tuple((v, substitute(e, fn)) for v, e in pr.assignments),
        )
        for pr in p.processes
    )
    q = dataclasses.replace(
        p,
        variables=tuple(v for v in p.variables if v.name not in outs),
        processes=procs,
        holes=tuple(h for h in p.holes if h.name not in gone),
        costs=tuple(c for c in p.costs if c.hole not in gone),
        _cache={},
    )
    return parse_problem(render_problem(q))


def replace_spec(p: SynthesisProblem, process: int, spec: str | Formula) -> SynthesisProblem:
    f = spec if isinstance(spec, Formula) else parse_ltl(spec, set(p.signal_map) | {v.name for v in p.variables})
    specs = list(p.specs)
    specs[process - 1] = f
    return parse_problem(render_problem(dataclasses.replace(p, specs=tuple(specs), _cache={})))


__all__ = [
    "RunConfig",
    "Solution",
    "Unrealizable",
    "Attempt",
    "synthesize",
    "optimize",
    "make_solution",
    "hole_expressions",
    "solution_to_json",
    "save_solution",
    "load_tables",
    "tables_from_json",
    "freeze_holes",
    "replace_spec",
    "resolve_mode",
    "CONDITION_TAGS",
]
