"""Random tiny sketches and formulas for the oracle tests."""

from __future__ import annotations

import itertools
import random

from agsynth.ltl import And, Atom, Eventually, Always, Next, Not, Or, Release, Until, Formula, TRUE, FALSE

_UNARY = ("not", "next", "eventually", "always")
_BINARY = ("and", "or", "until", "release")


def random_formula(rng: random.Random, atoms, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        return Atom(rng.choice(atoms))
    if rng.random() < 0.45:
        op = rng.choice(_UNARY)
        a = random_formula(rng, atoms, depth - 1)
        return {"not": Not, "next": Next, "eventually": Eventually, "always": Always}[op](a)
    op = rng.choice(_BINARY)
    a = random_formula(rng, atoms, depth - 1)
    b = random_formula(rng, atoms, depth - 1)
    return {"and": And, "or": Or, "until": Until, "release": Release}[op](a, b)


def formulas_up_to(atoms, depth: int):
    """Every formula of nesting depth at most ``depth`` over ``atoms`` (and the constants)."""
    levels = [[TRUE, FALSE] + [Atom(a) for a in atoms]]
    seen = set(levels[0])
    for _ in range(depth):
        prev = [f for lvl in levels for f in lvl]
        new = []
        for a in prev:
            for make in (Not, Next, Eventually, Always):
                new.append(make(a))
        for a, b in itertools.product(prev, repeat=2):
            for make in (And, Or, Until, Release):
                new.append(make(a, b))
        fresh = []
        for f in new:
            if f not in seen:
                seen.add(f)
                fresh.append(f)
        levels.append(fresh)
    return [f for lvl in levels for f in lvl]


def all_letters(atoms):
    return [dict(zip(atoms, bits)) for bits in itertools.product([False, True], repeat=len(atoms))]


def _expr(rng: random.Random, own: str, names, hole: str) -> str:
    other = rng.choice(names)
    return rng.choice([
        f"?{hole}",
        f"!?{hole}",
        f"{own} & ?{hole}",
        f"{own} | ?{hole}",
        f"{other} != ?{hole}",
        f"ite(?{hole}, !{own}, {other})",
        f"ite({other}, ?{hole}, {own})",
    ])


def random_problem(seed: int) -> str:
    """A sketch with at most three state bits and holes reading at most two bits.

    About a third of the sketches declare one bit of process-local memory,
    which is live at bound 1 only; those drop the shared variable so the
    state stays within three bits.
    """
    rng = random.Random(seed)
    memory = rng.random() < 0.35
    shared = not memory and rng.random() < 0.5
    b = lambda: rng.choice(["true", "false"])  # noqa: E731
    lines = ["problem rand%d" % seed, "mode ags", ""]
    lines.append(f"var x : bool state p1 init {b()}")
    lines.append(f"var y : bool state p2 init {b()}")
    names = ["x", "y"]
    if shared:
        lines.append(f"var z : bool state shared init {b()}")
        names.append("z")
    if memory:
        lines.append("memory m of p1 bits M observes x, m")
    obs1 = rng.sample(names + (["m"] if memory else []), rng.randint(0, 2))
    obs2 = rng.sample(names, rng.randint(0, 2))
    lines.append("hole h1 of p1 outputs c1" + (" observes " + ", ".join(obs1) if obs1 else ""))
    lines.append("hole h2 of p2 outputs c2" + (" observes " + ", ".join(obs2) if obs2 else ""))
    t1 = [f"  x' := {_expr(rng, 'x', names, 'h1')}"]
    t2 = [f"  y' := {_expr(rng, 'y', names, 'h2')}"]
    if shared:
        (t1 if rng.random() < 0.5 else t2).append(f"  z' := {rng.choice(['!z', 'x', 'y', 'x & y', 'z | y'])}")
    lines += ["trans p1 {", *t1, "}", "trans p2 {", *t2, "}"]
    atoms = names
    for proc in (1, 2):
        f = random_formula(rng, atoms, rng.randint(1, 3))
        lines.append(f'spec p{proc} "{f}"')
    return "\n".join(lines) + "\n"
