"""SMT-LIB v2 emission, external solver runs and model extraction."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass

from .encoder import ConstraintSet, hole_decl
from .errors import ExtractionError, SolverError
from .problem import StrategyTables, SynthesisProblem
from .terms import FunDecl, Term

LOGIC = "QF_UFBV"
SOLVER_ENV = "AGSYNTH_SOLVER"
DEFAULT_SOLVER = "z3"


@dataclass(frozen=True)
class SolverConfig:
    executable: str | None = None  # None: $AGSYNTH_SOLVER, else z3
    args: tuple[str, ...] = ("-in", "-smt2")
    file_args: tuple[str, ...] = ("-smt2",)
    timeout: float = 600.0
    workdir: str | None = None
    keep_artifacts: bool = False
    use_file: bool = False

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    def resolved_executable(self) -> list[str]:
        if self.executable:
            return [self.executable]
        override = os.environ.get(SOLVER_ENV)
        if override:
            return shlex.split(override)
        return [DEFAULT_SOLVER]


@dataclass(frozen=True)
class SolverResult:
    status: str  # sat | unsat | unknown | timeout | crashed
    model: str | None = None
    duration: float = 0.0
    detail: str = ""
    witnesses: int | None = None  # filled by the enumerative backend

    def __post_init__(self):
        if (self.status == "sat") != (self.model is not None):
            raise ValueError("model text is present exactly for sat results")

    @property
    def conclusive(self) -> bool:
        return self.status in ("sat", "unsat")


# ---------------------------------------------------------------- emission


def _sort(width: int) -> str:
    return "Bool" if width == 0 else f"(_ BitVec {width})"


def _bv(value: int, width: int) -> str:
    return "#b" + format(value, f"0{width}b")


def _app_text(f: FunDecl, args: tuple[int, ...]) -> str:
    if not args:
        return f.name
    return "(" + f.name + " " + " ".join(_bv(a, w) for a, w in zip(args, f.arg_widths)) + ")"


def emit_term(t: Term) -> str:
    out: list[str] = []
    _emit(t, out)
    return "".join(out)


_OPS = {"and": "and", "or": "or", "not": "not", "implies": "=>", "eq": "=", "uge": "bvuge",
        "ugt": "bvugt", "ult": "bvult", "add": "bvadd", "ite": "ite"}


def _emit(t: Term, out: list[str]) -> None:
    op = t.op
    if op == "const":
        if t.width == 0:
            out.append("true" if t.value else "false")
        else:
            out.append(_bv(t.value, t.width))
        return
    if op == "app":
        out.append(_app_text(t.fun, t.args))
        return
    out.append("(")
    out.append(_OPS[op])
    for a in t.args:
        out.append(" ")
        _emit(a, out)
    out.append(")")


def entry_queries(c: ConstraintSet) -> list[tuple[FunDecl, tuple[int, ...]]]:
    """Every table entry of every hole, in declaration and row order."""
    out = []
    for f in c.hole_decls():
        if f.arg_widths:
            for row in range(1 << f.arg_widths[0]):
                out.append((f, (row,)))
        else:
            out.append((f, ()))
    return out


def emit_script(c: ConstraintSet) -> str:
    lines = []
    queries = entry_queries(c)
    if queries:
        lines.append("(set-option :produce-models true)")
    lines.append(f"(set-logic {LOGIC})")
    for f in c.decls:
        args = " ".join(_sort(w) for w in f.arg_widths)
        lines.append(f"(declare-fun {f.name} ({args}) {_sort(f.result)})")
    for a in c.assertions:
        lines.append("(assert " + emit_term(a) + ")")
    lines.append("(check-sat)")
    if queries:
        lines.append("(get-value (" + " ".join(_app_text(f, args) for f, args in queries) + "))")
    return "\n".join(lines) + "\n"


def artifact_name(problem: str, mode: str, bound: int) -> str:
    return f"{problem}.{mode}.b{bound}.smt2"


# ---------------------------------------------------------------- solving


def solve(script: str, cfg: SolverConfig = SolverConfig(), artifact: str | None = None) -> SolverResult:
    """Run the external solver on ``script``."""
    cmd = cfg.resolved_executable()
    workdir = cfg.workdir or tempfile.gettempdir()
    path = None
    if cfg.keep_artifacts or cfg.use_file:
        os.makedirs(workdir, exist_ok=True)
        if artifact is None:
            fd, path = tempfile.mkstemp(suffix=".smt2", dir=workdir)
            os.close(fd)
        else:
            path = os.path.join(workdir, artifact)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(script)
    start = time.monotonic()
    try:
        if cfg.use_file:
            proc = subprocess.run(cmd + list(cfg.file_args) + [path], capture_output=True, text=True,
                                  timeout=cfg.timeout, cwd=workdir)
        else:
            proc = subprocess.run(cmd + list(cfg.args), input=script, capture_output=True, text=True,
                                  timeout=cfg.timeout, cwd=workdir)
    except subprocess.TimeoutExpired:
        return SolverResult("timeout", duration=time.monotonic() - start, detail=f"exceeded {cfg.timeout}s")
    except FileNotFoundError as err:
        raise SolverError(f"solver executable not found: {cmd[0]}") from err
    except OSError as err:
        return SolverResult("crashed", duration=time.monotonic() - start, detail=str(err))
    finally:
        if path is not None and not cfg.keep_artifacts:
            try:
                os.unlink(path)
            except OSError:
                pass
    duration = time.monotonic() - start
    text = proc.stdout.strip()
    first, _, rest = text.partition("\n")
    first = first.strip()
    if first == "sat":
        return SolverResult("sat", rest, duration)
    if first == "unsat":
        return SolverResult("unsat", None, duration)
    if first == "unknown":
        return SolverResult("unknown", None, duration, proc.stderr.strip())
    if "timeout" in text.lower():
        return SolverResult("timeout", None, duration, text)
    return SolverResult("crashed", None, duration, (proc.stderr or text).strip()[:2000])


# ---------------------------------------------------------------- models


def parse_sexprs(text: str) -> list:
    """Tiny s-expression reader: lists become Python lists, atoms stay strings."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            tokens.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            lst = []
            while tokens[pos] != ")":
                lst.append(read())
            pos += 1
            return lst
        if tok == ")":
            raise ExtractionError("unbalanced parenthesis in solver output")
        return tok

    out = []
    try:
        while pos < len(tokens):
            out.append(read())
    except IndexError:
        raise ExtractionError("truncated solver output") from None
    return out


def _literal_value(x) -> int:
    if isinstance(x, list):
        # (_ bvN W)
        if len(x) == 3 and x[0] == "_" and x[1].startswith("bv"):
            return int(x[1][2:])
        raise ExtractionError(f"unexpected value {x!r}")
    if x.startswith("#b"):
        return int(x[2:], 2)
    if x.startswith("#x"):
        return int(x[2:], 16)
    if x == "true":
        return 1
    if x == "false":
        return 0
    raise ExtractionError(f"unexpected value {x!r}")


def _key_text(x) -> str:
    if isinstance(x, list):
        if len(x) == 3 and x[0] == "_" and isinstance(x[1], str) and x[1].startswith("bv"):
            return str(int(x[1][2:]))
        return "(" + " ".join(_key_text(y) for y in x) + ")"
    if x.startswith("#b"):
        return str(int(x[2:], 2))
    if x.startswith("#x"):
        return str(int(x[2:], 16))
    return x


def model_values(r: SolverResult) -> dict[str, int]:
    if r.status != "sat" or r.model is None:
        raise ExtractionError(f"no model available (status {r.status})")
    vals: dict[str, int] = {}
    for block in parse_sexprs(r.model):
        if not isinstance(block, list):
            continue
        for pair in block:
            if isinstance(pair, list) and len(pair) == 2:
                vals[_key_text(pair[0])] = _literal_value(pair[1])
    return vals


def extract_tables(r: SolverResult, p: SynthesisProblem, b: int, mode: str | None = None) -> StrategyTables:
    """Strategy tables from the ``get-value`` answers of a sat result."""
    vals = model_values(r)
    m = p.at_bound(b)
    tables = {}
    missing = []
    for h in m.holes:
        f = hole_decl(h)
        tab = []
        for row in range(h.rows):
            key = f"({f.name} {row})" if f.arg_widths else f.name
            if key not in vals:
                missing.append(f"{h.name}[{row}]")
                tab.append(0)
            else:
                tab.append(vals[key])
        tables[h.name] = tab
    if missing:
        raise ExtractionError("model lacks entries: " + ", ".join(missing))
    return StrategyTables.of(tables, b, mode or p.mode)
