"""Reader and writer for the line-oriented ``.ags`` sketch format."""

from __future__ import annotations

import re

from .errors import ParseError, SemanticError, UndeclaredAtomError
from .expr import (
    BOOL,
    Expr,
    HoleRef,
    Name,
    compile_expr,
    holes_in,
    names_in,
    parse_expr,
    render_expr,
    type_of,
)
from .ltl import parse_ltl, render_ltl
from .problem import (
    BUILTIN_SIGNALS,
    MODE_ALIASES,
    SCHED,
    CostDecl,
    Hole,
    MemoryDecl,
    Process,
    SynthesisProblem,
    VarDecl,
)
from .expr import Unary

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_RESERVED = {SCHED, *BUILTIN_SIGNALS, "true", "false", "T", "F", "ite"}


def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        if ch == "#" and not in_str:
            break
        out.append(ch)
    return "".join(out).strip()


def _statements(text: str) -> list[tuple[int, str]]:
    """Split into logical statements; ``trans`` blocks may span lines."""
    stmts: list[tuple[int, str]] = []
    pending: list[str] | None = None
    start = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if pending is not None:
            pending.append(line)
            if "}" in line:
                stmts.append((start, "\n".join(pending)))
                pending = None
            continue
        if not line:
            continue
        if line.startswith("trans") and "{" in line and "}" not in line:
            pending = [line]
            start = no
            continue
        stmts.append((no, line))
    if pending is not None:
        raise ParseError("unterminated trans block", line=start)
    return stmts


def _names(text: str, line: int) -> list[str]:
    text = text.strip()
    if not text:
        return []
    out = [x.strip() for x in text.split(",")]
    for x in out:
        if not re.fullmatch(_IDENT, x):
            raise ParseError(f"bad name {x!r}", line=line)
    return out


def _const(text: str, is_bool: bool, width: int, line: int) -> int:
    t = text.strip()
    if t in ("true", "T"):
        v = 1
    elif t in ("false", "F"):
        v = 0
    elif re.fullmatch(r"\d+", t):
        v = int(t)
    else:
        raise ParseError(f"bad constant {t!r}", line=line)
    limit = 2 if is_bool else (1 << width)
    if v >= limit:
        raise SemanticError(f"line {line}: constant {v} out of range")
    return v


def _proc(tok: str, line: int) -> int:
    if tok not in ("p1", "p2"):
        raise ParseError(f"expected p1 or p2, found {tok!r}", line=line)
    return int(tok[1])


def parse_problem(text: str) -> SynthesisProblem:
    name = "problem"
    mode = "ags"
    variables: dict[str, VarDecl] = {}
    var_lines: dict[str, int] = {}
    holes: list[tuple[int, dict]] = []
    memory: list[tuple[int, MemoryDecl]] = []
    signals: dict[str, tuple[int, Expr]] = {}
    trans: dict[int, tuple[int, list[tuple[str, Expr]]]] = {}
    specs: dict[int, tuple[int, str]] = {}
    costs: list[tuple[int, CostDecl]] = []
    inits: list[tuple[int, str, str]] = []

    def declare(v: VarDecl, line: int):
        if v.name in variables or v.name in signals or v.name in _RESERVED:
            raise SemanticError(f"line {line}: duplicate or reserved name {v.name!r}")
        variables[v.name] = v
        var_lines[v.name] = line

    for line, st in _statements(text):
        kw = st.split(None, 1)[0].split("{")[0]
        rest = st[len(kw):].strip()
        if kw == "problem":
            if not re.fullmatch(_IDENT, rest):
                raise ParseError("expected problem name", line=line)
            name = rest
        elif kw == "mode":
            if rest not in MODE_ALIASES:
                raise ParseError(f"unknown mode {rest!r}", line=line)
            mode = MODE_ALIASES[rest]
        elif kw == "var":
            m = re.fullmatch(
                rf"({_IDENT})\s*:\s*(bool|uint\s*<\s*(\d+)\s*>)\s+(state|input)\s+(p1|p2|shared)(?:\s+init\s+(\S+))?",
                rest,
            )
            if not m:
                raise ParseError("malformed var declaration", line=line)
            vname, typ, width, kind, owner, init = m.groups()
            is_bool = typ == "bool"
            w = 1 if is_bool else int(width)
            if w < 1:
                raise SemanticError(f"line {line}: width must be at least 1")
            if kind == "input" and init is not None:
                raise SemanticError(f"line {line}: inputs carry no initial value")
            if kind == "input" and owner == "shared":
                raise SemanticError(f"line {line}: inputs belong to one process")
            iv = _const(init, is_bool, w, line) if init is not None else None
            declare(VarDecl(vname, w, is_bool, owner, kind, iv), line)
        elif kw == "hole":
            m = re.fullmatch(
                rf"({_IDENT})\s+of\s+(\S+)(?:\s+outputs\s+(.*?))?(?:\s+observes(?:\s+(.*))?)?",
                rest,
            )
            if not m:
                raise ParseError("malformed hole declaration", line=line)
            hname, proc, outs, obs = m.groups()
            holes.append((line, dict(name=hname, owner=_proc(proc, line),
                                     outputs=_names(outs or "", line), observes=_names(obs or "", line))))
        elif kw == "memory":
            m = re.fullmatch(
                rf"(?:({_IDENT})\s+)?of\s+(\S+)\s+bits\s+(M|\d+)(\s+shared)?(?:\s+observes(?:\s+(.*))?)?",
                rest,
            )
            if not m:
                raise ParseError("malformed memory declaration", line=line)
            mname, proc, bits, shared, obs = m.groups()
            owner = _proc(proc, line)
            is_shared = bool(shared)
            if mname is None:
                mname = "mem" if is_shared else f"mem{owner}"
            memory.append((line, MemoryDecl(owner, mname, None if bits == "M" else int(bits), is_shared,
                                            tuple(_names(obs or "", line)))))
        elif kw == "signal":
            m = re.fullmatch(rf"({_IDENT})\s*:=\s*(.+)", rest)
            if not m:
                raise ParseError("malformed signal definition", line=line)
            sname = m.group(1)
            if sname in signals or sname in variables or sname in _RESERVED:
                raise SemanticError(f"line {line}: duplicate or reserved name {sname!r}")
            signals[sname] = (line, parse_expr(m.group(2), line))
        elif kw == "trans":
            m = re.fullmatch(r"(\S+)\s*\{(.*)\}", rest, re.DOTALL)
            if not m:
                raise ParseError("malformed trans block", line=line)
            pi = _proc(m.group(1), line)
            if pi in trans:
                raise SemanticError(f"line {line}: second trans block for p{pi}")
            assigns = []
            for part in re.split(r"[;\n]", m.group(2)):
                part = part.strip()
                if not part:
                    continue
                am = re.fullmatch(rf"({_IDENT})'\s*:=\s*(.+)", part, re.DOTALL)
                if not am:
                    raise ParseError(f"malformed assignment {part!r}", line=line)
                assigns.append((am.group(1), parse_expr(am.group(2), line)))
            trans[pi] = (line, assigns)
        elif kw == "spec":
            m = re.fullmatch(r'(\S+)\s+"(.*)"', rest)
            if not m:
                raise ParseError("malformed spec line", line=line)
            pi = _proc(m.group(1), line)
            if pi in specs:
                raise SemanticError(f"line {line}: second spec for p{pi}")
            specs[pi] = (line, m.group(2))
        elif kw == "cost":
            m = re.fullmatch(rf"({_IDENT})\s*:=\s*count\s+({_IDENT})\s+where\s+(.+?)\s+weight\s+(\d+)", rest)
            if not m:
                raise ParseError("malformed cost declaration", line=line)
            costs.append((line, CostDecl(m.group(1), m.group(2), parse_expr(m.group(3), line), int(m.group(4)))))
        elif kw == "init":
            for part in rest.split(","):
                if not part.strip():
                    continue
                im = re.fullmatch(rf"\s*({_IDENT})\s*=\s*(\S+)\s*", part)
                if not im:
                    raise ParseError(f"malformed init entry {part.strip()!r}", line=line)
                inits.append((line, im.group(1), im.group(2)))
        else:
            raise ParseError(f"unknown statement {kw!r}", line=line)

    return _assemble(name, mode, variables, var_lines, holes, memory, signals, trans, specs, costs, inits)


def _assemble(name, mode, variables, var_lines, holes, memory, signals, trans, specs, costs, inits):
    for line, vname, val in inits:
        if vname not in variables:
            raise SemanticError(f"line {line}: init of undeclared variable {vname!r}")
        v = variables[vname]
        if v.kind != "state":
            raise SemanticError(f"line {line}: init of non-state variable {vname!r}")
        if v.init is not None:
            raise SemanticError(f"line {line}: {vname!r} initialized twice")
        variables[vname] = VarDecl(v.name, v.width, v.is_bool, v.owner, v.kind, _const(val, v.is_bool, v.width, line))
    for v in variables.values():
        if v.kind == "state" and v.init is None:
            raise SemanticError(f"line {var_lines[v.name]}: state variable {v.name!r} has no initial value")

    # memory: at most one declaration per process; shared ones agree
    mem_decls: list[MemoryDecl] = []
    seen_owner = set()
    for line, md in memory:
        if md.owner in seen_owner:
            raise SemanticError(f"line {line}: second memory declaration for p{md.owner}")
        seen_owner.add(md.owner)
        if md.name in variables or md.name in signals:
            raise SemanticError(f"line {line}: memory name {md.name!r} clashes")
        mem_decls.append(md)
    if len(mem_decls) == 2:
        a, b = mem_decls
        if a.name == b.name and not (a.shared and b.shared and a.bits == b.bits):
            raise SemanticError("memories with the same name must both be shared with equal size")
        if a.name != b.name and (a.shared or b.shared):
            raise SemanticError("shared memory must use the same name in both processes")
    mem_owner = {}
    for md in mem_decls:
        mem_owner[md.name] = "shared" if md.shared else f"p{md.owner}"

    # holes and their outputs
    hole_objs: list[Hole] = []
    out_owner: dict[str, str] = {}
    hole_names = set()
    for line, h in holes:
        if h["name"] in hole_names or h["name"] in ("mu1", "mu2"):
            raise SemanticError(f"line {line}: duplicate hole {h['name']!r}")
        hole_names.add(h["name"])
        outs = h["outputs"] or [h["name"]]
        for o in outs:
            if o in out_owner:
                raise SemanticError(f"line {line}: variable {o!r} is the output of two holes")
            if o not in variables:
                if o in signals or o in _RESERVED or o in mem_owner:
                    raise SemanticError(f"line {line}: output {o!r} clashes with another name")
                variables[o] = VarDecl(o, 1, True, f"p{h['owner']}", "input", None)
                var_lines[o] = line
            v = variables[o]
            if v.kind != "input" or v.owner != f"p{h['owner']}":
                raise SemanticError(f"line {line}: output {o!r} must be an input of p{h['owner']}")
            out_owner[o] = h["name"]
        hole_objs.append(Hole(h["name"], h["owner"], tuple(outs), tuple(h["observes"])))
    for md in mem_decls:
        hole_objs.append(Hole(md.hole, md.owner, (md.name,), md.observes, "memory"))

    # observation lists
    for h in hole_objs:
        if len(set(h.observes)) != len(h.observes):
            raise SemanticError(f"hole {h.name!r} lists an observation twice")
        for o in h.observes:
            _check_observation(h, o, variables, signals, mem_owner, out_owner)

    # signals: types and acyclicity
    env = {v.name: v.type_code for v in variables.values()}
    env.update({m: 1 for m in mem_owner})  # width irrelevant for name checks
    env.update({s: BOOL for s in signals})
    env[SCHED] = BOOL
    env.update({s: BOOL for s in BUILTIN_SIGNALS})
    for h in hole_objs:
        if len(h.outputs) == 1:
            env["?" + h.name] = env[h.outputs[0]]
    for sname, (line, e) in signals.items():
        if holes_in(e) or any(n in mem_owner for n in names_in(e)):
            raise SemanticError(f"line {line}: signal {sname!r} may not read holes or memory")
        _typecheck(e, env, BOOL, line)
    _check_acyclic(signals)

    # transitions
    procs = []
    for pi in (1, 2):
        own_state = [v.name for v in variables.values() if v.kind == "state" and v.owner in (f"p{pi}", "shared")]
        own_inputs = [v.name for v in variables.values() if v.kind == "input" and v.owner == f"p{pi}"]
        line, assigns = trans.get(pi, (0, []))
        seen = set()
        for vname, e in assigns:
            if vname not in own_state:
                raise SemanticError(f"line {line}: p{pi} cannot assign {vname!r}")
            if vname in seen:
                raise SemanticError(f"line {line}: {vname!r} assigned twice")
            seen.add(vname)
            for hn in holes_in(e):
                if hn not in hole_names or _hole(hole_objs, hn).owner != pi:
                    raise SemanticError(f"line {line}: p{pi} refers to foreign or unknown hole {hn!r}")
            for n in names_in(e):
                if n in mem_owner:
                    raise SemanticError(f"line {line}: memory {n!r} is only readable by holes")
                if n in variables and variables[n].kind == "input" and variables[n].owner != f"p{pi}":
                    raise SemanticError(f"line {line}: p{pi} reads input {n!r} of the other process")
            _typecheck(e, env, variables[vname].type_code, line)
        procs.append(Process(pi, tuple(own_state), tuple(own_inputs), tuple(assigns)))

    # specs: atoms are signals, builtins or boolean variables
    atom_names = set(signals) | set(BUILTIN_SIGNALS) | {
        v.name for v in variables.values() if v.is_bool and v.name not in out_owner
    }
    spec_f = []
    for pi in (1, 2):
        line, txt = specs.get(pi, (0, "true"))
        try:
            spec_f.append(parse_ltl(txt, atom_names))
        except UndeclaredAtomError as e:
            raise SemanticError(f"line {line}: spec of p{pi} uses undeclared atom {e.name!r}") from None
        except ParseError as e:
            raise ParseError(f"spec of p{pi}: {e}", line=line) from None

    # costs
    for line, c in costs:
        if c.hole not in hole_names and c.hole not in ("mu1", "mu2"):
            raise SemanticError(f"line {line}: cost refers to unknown hole {c.hole!r}")
        if c.hole in ("mu1", "mu2") and not any(h.name == c.hole for h in hole_objs):
            raise SemanticError(f"line {line}: cost refers to undeclared memory hole {c.hole!r}")
        h = _hole(hole_objs, c.hole)
        allowed = set(h.observes) | {o + "'" for o in h.outputs} | {"?" + h.name}
        for n in _pred_names(c.predicate):
            if n not in allowed:
                raise SemanticError(f"line {line}: cost predicate may not mention {n!r}")

    all_vars = list(variables.values())
    all_vars.append(VarDecl(SCHED, 1, True, "shared", "input", None))
    sigs = [(k, e) for k, (_, e) in signals.items()]
    sigs.append(("sched_p1", Name(SCHED)))
    sigs.append(("sched_p2", Unary("!", Name(SCHED))))
    return SynthesisProblem(
        name=name,
        variables=tuple(all_vars),
        processes=(procs[0], procs[1]),
        holes=tuple(hole_objs),
        memory=tuple(mem_decls),
        signals=tuple(sigs),
        specs=(spec_f[0], spec_f[1]),
        costs=tuple(c for _, c in costs),
        mode=mode,
    )


def _hole(holes: list[Hole], name: str) -> Hole:
    for h in holes:
        if h.name == name:
            return h
    raise KeyError(name)


def _pred_names(e: Expr) -> set[str]:
    from .expr import Binary, Bit, Ite, Unary as U

    if isinstance(e, Name):
        return {e.ident + ("'" if e.primed else "")}
    if isinstance(e, HoleRef):
        return {"?" + e.hole}
    if isinstance(e, Bit):
        return {e.ident}
    if isinstance(e, U):
        return _pred_names(e.arg)
    if isinstance(e, Binary):
        return _pred_names(e.left) | _pred_names(e.right)
    if isinstance(e, Ite):
        return _pred_names(e.cond) | _pred_names(e.then) | _pred_names(e.other)
    return set()


def _check_observation(h: Hole, o: str, variables, signals, mem_owner, out_owner) -> None:
    where = f"hole {h.name!r}"
    if o in mem_owner:
        if mem_owner[o] not in ("shared", f"p{h.owner}"):
            raise SemanticError(f"{where} observes foreign memory {o!r}")
        return
    if o in signals:
        return
    if o == SCHED:
        return
    if o not in variables:
        raise SemanticError(f"{where} observes undeclared name {o!r}")
    v = variables[o]
    if o in out_owner:
        raise SemanticError(f"{where} observes controllable input {o!r}")
    if v.kind == "input" and v.owner != f"p{h.owner}":
        raise SemanticError(f"{where} observes input {o!r} of the other process")


def _typecheck(e: Expr, env, want, line: int) -> None:
    try:
        t = type_of(e, env, want)
    except SemanticError as err:
        raise SemanticError(f"line {line}: {err}") from None
    if t != want and not (t == -1):
        raise SemanticError(f"line {line}: expression {render_expr(e)!r} has the wrong type")


def _check_acyclic(signals) -> None:
    state = {}

    def visit(s, path):
        if state.get(s) == 2:
            return
        if state.get(s) == 1:
            raise SemanticError(f"cyclic signal definitions through {s!r}")
        state[s] = 1
        for n in names_in(signals[s][1]):
            if n in signals:
                visit(n, path + [n])
        state[s] = 2

    for s in signals:
        visit(s, [s])


# ---------------------------------------------------------------- rendering


def render_problem(p: SynthesisProblem) -> str:
    lines = [f"problem {p.name}", f"mode {p.mode}"]
    for v in p.variables:
        if v.name == SCHED:
            continue
        typ = "bool" if v.is_bool else f"uint<{v.width}>"
        s = f"var {v.name} : {typ} {v.kind} {v.owner}"
        if v.init is not None:
            s += f" init {('true' if v.init else 'false') if v.is_bool else v.init}"
        lines.append(s)
    for md in p.memory:
        bits = "M" if md.bits is None else str(md.bits)
        s = f"memory {md.name} of p{md.owner} bits {bits}"
        if md.shared:
            s += " shared"
        if md.observes:
            s += " observes " + ", ".join(md.observes)
        lines.append(s)
    for h in p.holes:
        if h.role != "control":
            continue
        s = f"hole {h.name} of p{h.owner} outputs {', '.join(h.outputs)}"
        if h.observes:
            s += " observes " + ", ".join(h.observes)
        lines.append(s)
    for sname, e in p.signals:
        if sname in BUILTIN_SIGNALS:
            continue
        lines.append(f"signal {sname} := {render_expr(e)}")
    for proc in p.processes:
        if not proc.assignments:
            continue
        lines.append(f"trans p{proc.index} {{")
        for vname, e in proc.assignments:
            lines.append(f"  {vname}' := {render_expr(e)};")
        lines.append("}")
    for i, f in enumerate(p.specs, start=1):
        lines.append(f'spec p{i} "{render_ltl(f)}"')
    for c in p.costs:
        lines.append(f"cost {c.name} := count {c.hole} where {render_expr(c.predicate)} weight {c.weight}")
    return "\n".join(lines) + "\n"


def load_problem(path: str) -> SynthesisProblem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


__all__ = ["parse_problem", "render_problem", "load_problem", "compile_expr"]
