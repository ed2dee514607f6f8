"""Shared test corpus: fixture complexes, named programs, small helpers."""

from __future__ import annotations

import random
from collections import Counter

from dihom import lang
from dihom.corpus import fixture_names, load_fixture
from dihom.paths import Move, PathT, homotopy_moves, parse_path
from dihom.pcs_core import PrecubicalSet, Step, hollow_cube, standard_cube

MUTEX_PAIR = "P(a);V(a) || P(a);V(a)"
SWISS_FLAG = "P(a);P(b);V(b);V(a) || P(b);P(a);V(a);V(b)"

PROGRAMS = [
    MUTEX_PAIR,
    SWISS_FLAG,
    "(P(a) || P(b));(V(a) || V(b)) + P(c);V(c)",
    "P(a) || P(b) || P(c)",
    "x || y || z",
    "P(a);V(a) || P(a);V(a) || P(a);V(a)",
    "P(a);P(b);V(a);V(b) || P(b);V(b)",
    "*(x;y) || P(a);V(a)",
    "(x + y);z || w",
    "P(a);(x + y);V(a) || P(a);V(a)",
]

# hollow cube without its bottom square: the two outer dipaths around the hole
HOLE_F = "--- ---0-> --+ -0-+-> +-+"
HOLE_G = "--- -0---> +-- -+-0-> +-+"


def fixture_corpus() -> dict[str, PrecubicalSet]:
    """Every complex named in the flag cross-check corpus."""
    out = {f"cube-{n}": standard_cube(n) for n in range(5)}
    out.update({name: load_fixture(name) for name in fixture_names()})
    return out


def program_complex(text: str) -> lang.PointedPcs:
    return lang.semantics(lang.parse(text))


def hole_paths() -> tuple[PrecubicalSet, PathT, PathT]:
    C = load_fixture("hollow-cube-minus-bottom")
    return C, parse_path(C, HOLE_F), parse_path(C, HOLE_G)


def degenerate_skeleton(C: PrecubicalSet) -> bool:
    """A loop edge, or two edges between the same two vertices (either direction)."""
    seen: Counter = Counter()
    for e in range(C.count(1)):
        x, y = C.src(e), C.tgt(e)
        if x == y:
            return True
        seen[frozenset((x, y))] += 1
    return any(v > 1 for v in seen.values())


def random_walk(C: PrecubicalSet, start: int, length: int, rng: random.Random, directed: bool = False) -> PathT:
    """A random path; stops early at a vertex with no usable step."""
    v, steps = start, []
    for _ in range(length):
        opts = [s for s in C.incidence[v] if directed is False or not s.reversed]
        if not opts:
            break
        s = rng.choice(sorted(opts))
        steps.append(s)
        v = C.step_tgt(s)
    return PathT(start, tuple(steps))


def synth_homotopy(C: PrecubicalSet, s: PathT, detours: int, rng: random.Random,
                   slack: int = 4, max_extra: int = 200) -> tuple[list[Move], PathT]:
    """Random homotopy moves from ``s``: ``detours`` free moves, then more until a dipath is reached.

    Paths never grow more than ``slack`` steps past ``s``.  The final path may
    still be undirected when ``max_extra`` moves did not suffice.
    """
    cur, moves = s, []
    for k in range(detours + max_extra):
        if k >= detours and cur.is_dipath:
            break
        m, cur = rng.choice(homotopy_moves(C, cur, max_len=len(s) + slack))
        moves.append(m)
    return moves, cur


def step(edge: int, rev: bool = False) -> Step:
    return Step(edge, rev)


__all__ = [
    "HOLE_F", "HOLE_G", "MUTEX_PAIR", "PROGRAMS", "SWISS_FLAG",
    "degenerate_skeleton", "fixture_corpus", "hole_paths", "hollow_cube",
    "program_complex", "random_walk", "standard_cube", "step", "synth_homotopy",
]
