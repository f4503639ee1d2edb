"""Command-line front end.

Exit codes: 0 solution found or check holds, 1 unrealizable at the bound
or check violated, 2 usage or input error, 3 solver inconclusive.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .automata import translate_to_ucw
from .checker import brute_force_synthesize, check_solution, render_counterexample
from .driver import (
    RunConfig,
    Solution,
    make_solution,
    load_tables,
    resolve_mode,
    save_solution,
    solution_to_json,
    synthesize,
)
from .dsl import load_problem
from .errors import AgsynthError, InternalError
from .ltl import parse_ltl
from .smt import SolverConfig

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _opt_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN..MAX, got {text!r}") from None
    if a < 1 or a > b:
        raise argparse.ArgumentTypeError(f"need 1 <= MIN <= MAX, got {text!r}")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="agsynth", description="Assume-guarantee synthesis of two-process sketches.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize hole tables")
    s.add_argument("file")
    s.add_argument("--mode", choices=["ags", "coop", "comp", "cooperative", "competitive"])
    s.add_argument("--max-memory", type=int, default=3, metavar="N", help="largest memory bound tried")
    s.add_argument("--opt", type=_opt_range, metavar="MIN..MAX", help="minimize declared costs")
    s.add_argument("--search", choices=["descent", "binary"], default="descent")
    s.add_argument("--solver", metavar="PATH", help="solver executable (default z3, or $AGSYNTH_SOLVER)")
    s.add_argument("--backend", choices=["smt", "enumerative"], default="smt")
    s.add_argument("--timeout", type=float, default=600.0, metavar="S")
    s.add_argument("--jobs", type=int, default=1, help="solve this many bounds concurrently")
    s.add_argument("--keep-smt", metavar="DIR", help="keep solver scripts in DIR")
    s.add_argument("--exhaustive", action="store_true", help="ground every product pair")
    s.add_argument("--out", "-o", metavar="PATH", help="solution file (default <problem>.solution.json)")

    c = sub.add_parser("check", help="verify a solution file")
    c.add_argument("file")
    c.add_argument("solution")
    c.add_argument("--mode", choices=["ags", "coop", "comp", "cooperative", "competitive"])

    t = sub.add_parser("translate", help="dump the automaton of a formula")
    t.add_argument("--ltl", required=True)
    t.add_argument("--dot", action="store_true")

    e = sub.add_parser("enumerate", help="brute-force every table combination")
    e.add_argument("file")
    e.add_argument("--mode", choices=["ags", "coop", "comp", "cooperative", "competitive"])
    e.add_argument("--bound", type=int, default=0)
    e.add_argument("--budget", type=int, default=1 << 20)
    e.add_argument("--show", type=int, default=10, metavar="K", help="print at most K solutions")
    return ap


def _print_solution(s: Solution) -> None:
    print(f"solution at memory bound {s.bound} ({s.mode})")
    if s.cost is not None:
        print(f"cost {s.cost}, opt {s.opt}")
    for hole, exprs in s.expressions.items():
        for out, text in exprs.items():
            print(f"  {hole}: {out} := {text}")


def _synth(args) -> int:
    p = load_problem(args.file)
    solver = SolverConfig(
        executable=args.solver,
        timeout=args.timeout,
        workdir=args.keep_smt,
        keep_artifacts=bool(args.keep_smt),
    )
    cfg = RunConfig(
        mode=args.mode,
        max_bound=args.max_memory,
        opt_range=args.opt,
        solver=solver,
        out=args.out,
        verbosity=args.verbose,
        backend=args.backend,
        search=args.search,
        exhaustive=args.exhaustive,
        jobs=args.jobs,
    )
    res = synthesize(p, cfg)
    if not isinstance(res, Solution):
        for a in res.attempts:
            print(f"bound {a.bound}: {a.status} ({a.duration:.2f}s)", file=sys.stderr)
        if res.inconclusive:
            print("no solution found; some bounds were inconclusive", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        print(f"unrealizable up to memory bound {res.max_bound}", file=sys.stderr)
        return EXIT_NO
    out = args.out or f"{p.name}.solution.json"
    save_solution(p, res, out)
    _print_solution(res)
    print(f"written to {out}")
    return EXIT_OK


def _check(args) -> int:
    p = load_problem(args.file)
    t = load_tables(args.solution)
    mode = resolve_mode(p, args.mode or t.mode)
    rep = check_solution(p, t, mode)
    m = p.at_bound(t.bound)
    for v in rep.verdicts:
        state = "vacuous" if v.vacuous else ("holds" if v.holds else "VIOLATED")
        print(f"condition ({v.tag}): {state}")
    bad = rep.first_violation()
    if bad is None:
        return EXIT_OK
    print(f"counterexample for condition ({bad.tag}):")
    print(render_counterexample(m, bad.counterexample))
    return EXIT_NO


def _translate(args) -> int:
    f = parse_ltl(args.ltl)
    a = translate_to_ucw(f)
    if args.dot:
        print(a.to_dot())
        return EXIT_OK
    print(f"states {a.n_states}, initial {a.initial}, rejecting {sorted(a.rejecting)}")
    for src, label, dst in a.edges:
        print(f"  {src} -[{label}]-> {dst}")
    return EXIT_OK


def _enumerate(args) -> int:
    p = load_problem(args.file)
    mode = resolve_mode(p, args.mode)
    m = p.at_bound(args.bound)
    total = 1
    for h in m.holes:
        total <<= h.rows * h.out_width
    found = brute_force_synthesize(p, args.bound, mode, budget=args.budget)
    print(f"{len(found)} of {total} candidate table combinations are {mode} solutions at bound {args.bound}")
    for t in found[: args.show]:
        s = make_solution(p, t, check_solution(p, t, mode))
        print(json.dumps({h: e for h, e in s.expressions.items()}))
    return EXIT_OK if found else EXIT_NO


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(message)s")
    handler = {"synth": _synth, "check": _check, "translate": _translate, "enumerate": _enumerate}[args.cmd]
    try:
        return handler(args)
    except InternalError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (AgsynthError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


__all__ = ["main", "build_parser", "solution_to_json"]
