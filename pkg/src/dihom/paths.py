"""Paths with possibly reversed edges, dihomotopy and homotopy.

A dihomotopy step replaces two consecutive steps by the other half of an
oriented tile.  A homotopy step may also insert or delete a pair ``a·ā`` or
``ā·a``.  Dihomotopy preserves length, so its classes are finite and are
explored exhaustively.  Homotopy is searched within a length bound.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

from .pcs_core import PrecubicalSet, Step, tiles

__all__ = [
    "Step", "PathT", "Move", "HomotopyResult", "InvalidPath", "EndpointMismatch",
    "path_end", "check_path", "reverse_path", "homologous", "tile_table", "dihomotopy_moves", "dihomotopy_neighbors",
    "homotopy_moves", "homotopy_neighbors", "replay", "are_dihomotopic",
    "dihomotopy_witness", "dihomotopy_class", "are_homotopic", "dipaths",
    "dihomotopy_classes", "is_locally_geodesic", "is_geodesic", "format_path",
    "parse_path", "path_to_json", "path_from_json",
]


class InvalidPath(ValueError):
    pass


class EndpointMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PathT:
    start: int
    steps: tuple[Step, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def is_dipath(self) -> bool:
        return not any(s.reversed for s in self.steps)

    def key(self):
        return tuple((s.edge, s.reversed) for s in self.steps)

    def then(self, other: "PathT") -> "PathT":
        return PathT(self.start, self.steps + other.steps)


class Move(NamedTuple):
    """One rewriting step: ``tile`` swaps the pair at ``position`` for
    ``steps``; ``insert`` puts ``steps`` at ``position``; ``delete`` removes
    the pair ``steps`` found at ``position``."""

    rule: str
    position: int
    steps: tuple[Step, ...]

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "position": self.position,
            "steps": [[s.edge, s.reversed] for s in self.steps],
        }


def path_end(C: PrecubicalSet, s: PathT) -> int:
    v = s.start
    for st in s.steps:
        if C.step_src(st) != v:
            raise InvalidPath(f"step {st} does not start at vertex {C.name(0, v)}")
        v = C.step_tgt(st)
    return v


def check_path(C: PrecubicalSet, s: PathT) -> None:
    if not 0 <= s.start < C.count(0):
        raise InvalidPath(f"no vertex {s.start}")
    for st in s.steps:
        if not 0 <= st.edge < C.count(1):
            raise InvalidPath(f"no edge {st.edge}")
    path_end(C, s)


def reverse_path(C: PrecubicalSet, s: PathT) -> PathT:
    return PathT(path_end(C, s), tuple(st.inv() for st in reversed(s.steps)))


# ---------------------------------------------------------------------------
# tiles on steps


def tile_table(C: PrecubicalSet) -> dict[tuple[Step, Step], list[tuple[Step, Step]]]:
    """For each composable pair of steps, the pairs it may be swapped with."""
    cached = C.__dict__.get("_tile_table")
    if cached is not None:
        return cached
    table: dict[tuple[Step, Step], set[tuple[Step, Step]]] = {}
    for t in tiles(C):
        for a, b, b2, a2 in t.oriented():
            if (a, b) != (b2, a2):
                table.setdefault((a, b), set()).add((b2, a2))
    out = {k: sorted(v) for k, v in table.items()}
    C.__dict__["_tile_table"] = out
    return out


def _encode(s: Step) -> int:
    return 2 * s.edge + (1 if s.reversed else 0)


def _decode(c: int) -> Step:
    return Step(c >> 1, bool(c & 1))


def _code_table(C: PrecubicalSet):
    cached = C.__dict__.get("_code_table")
    if cached is None:
        cached = {
            (_encode(a), _encode(b)): [(_encode(x), _encode(y)) for x, y in v]
            for (a, b), v in tile_table(C).items()
        }
        C.__dict__["_code_table"] = cached
    return cached


def _code_incidence(C: PrecubicalSet):
    cached = C.__dict__.get("_code_incidence")
    if cached is None:
        cached = [[_encode(s) for s in lst] for lst in C.incidence]
        C.__dict__["_code_incidence"] = cached
    return cached


def _tile_moves(table, seq: tuple[int, ...]) -> Iterator[tuple[tuple, tuple]]:
    for i in range(len(seq) - 1):
        for x, y in table.get((seq[i], seq[i + 1]), ()):
            yield ("tile", i, (x, y)), seq[:i] + (x, y) + seq[i + 2:]


def _vertices(C: PrecubicalSet, start: int, seq: tuple[int, ...]) -> list[int]:
    out = [start]
    for c in seq:
        e = c >> 1
        out.append(C.src(e) if c & 1 else C.tgt(e))
    return out


def _homotopy_moves(C, table, inc, start, seq, max_len):
    yield from _tile_moves(table, seq)
    for i in range(len(seq) - 1):
        if seq[i] ^ 1 == seq[i + 1]:
            yield ("delete", i, (seq[i], seq[i + 1])), seq[:i] + seq[i + 2:]
    if len(seq) + 2 <= max_len:
        for i, v in enumerate(_vertices(C, start, seq)):
            for c in inc[v]:
                yield ("insert", i, (c, c ^ 1)), seq[:i] + (c, c ^ 1) + seq[i:]


def _as_move(raw) -> Move:
    rule, pos, pair = raw
    return Move(rule, pos, tuple(_decode(c) for c in pair))


def dihomotopy_moves(C: PrecubicalSet, s: PathT) -> list[tuple[Move, PathT]]:
    seq = tuple(_encode(x) for x in s.steps)
    return [
        (_as_move(m), PathT(s.start, tuple(_decode(c) for c in new)))
        for m, new in _tile_moves(_code_table(C), seq)
    ]


def dihomotopy_neighbors(C: PrecubicalSet, s: PathT) -> set[PathT]:
    """Paths one tile move away from ``s``."""
    return {p for _, p in dihomotopy_moves(C, s)}


def homotopy_moves(C: PrecubicalSet, s: PathT, max_len: int | None = None) -> list[tuple[Move, PathT]]:
    seq = tuple(_encode(x) for x in s.steps)
    bound = len(seq) + 2 if max_len is None else max_len
    return [
        (_as_move(m), PathT(s.start, tuple(_decode(c) for c in new)))
        for m, new in _homotopy_moves(C, _code_table(C), _code_incidence(C), s.start, seq, bound)
    ]


def homotopy_neighbors(C: PrecubicalSet, s: PathT) -> set[PathT]:
    """Tile moves plus every single insertion or deletion of a backtrack."""
    return {p for _, p in homotopy_moves(C, s)}


def replay(C: PrecubicalSet, s: PathT, moves: Iterable[Move]) -> PathT:
    """Apply ``moves`` to ``s``, checking that each one is legal."""
    steps = list(s.steps)
    table = tile_table(C)
    for m in moves:
        i = m.position
        if m.rule == "tile":
            pair = tuple(steps[i:i + 2])
            if len(pair) != 2 or tuple(m.steps) not in table.get(pair, ()):
                raise InvalidPath(f"illegal tile move {m}")
            steps[i:i + 2] = m.steps
        elif m.rule == "delete":
            pair = tuple(steps[i:i + 2])
            if pair != tuple(m.steps) or len(pair) != 2 or pair[0].inv() != pair[1]:
                raise InvalidPath(f"illegal deletion {m}")
            del steps[i:i + 2]
        elif m.rule == "insert":
            a, b = m.steps
            if a.inv() != b or not 0 <= i <= len(steps):
                raise InvalidPath(f"illegal insertion {m}")
            v = path_end(C, PathT(s.start, tuple(steps[:i])))
            if C.step_src(a) != v:
                raise InvalidPath(f"insertion {m} does not start at vertex {v}")
            steps[i:i] = [a, b]
        else:
            raise InvalidPath(f"unknown rule {m.rule!r}")
    out = PathT(s.start, tuple(steps))
    check_path(C, out)
    return out


# ---------------------------------------------------------------------------
# deciders


def _same_endpoints(C, s, t):
    check_path(C, s)
    check_path(C, t)
    if s.start != t.start or path_end(C, s) != path_end(C, t):
        raise EndpointMismatch("paths do not have the same endpoints")


def _bfs(expand, source, goal=None):
    """Breadth-first search; returns (parents, found)."""
    parents = {source: None}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            return parents, True
        for move, nxt in expand(cur):
            if nxt not in parents:
                parents[nxt] = (cur, move)
                queue.append(nxt)
    return parents, goal is not None and goal in parents


def _trace(parents, goal) -> list[Move]:
    out = []
    while parents[goal] is not None:
        prev, move = parents[goal]
        out.append(_as_move(move))
        goal = prev
    return out[::-1]


def dihomotopy_witness(C: PrecubicalSet, s: PathT, t: PathT) -> list[Move] | None:
    """Tile moves turning ``s`` into ``t``, or None when not dihomotopic."""
    _same_endpoints(C, s, t)
    if len(s) != len(t):
        return None
    table = _code_table(C)
    src = tuple(_encode(x) for x in s.steps)
    dst = tuple(_encode(x) for x in t.steps)
    parents, found = _bfs(lambda q: _tile_moves(table, q), src, dst)
    return _trace(parents, dst) if found else None


def are_dihomotopic(C: PrecubicalSet, s: PathT, t: PathT) -> bool:
    return dihomotopy_witness(C, s, t) is not None


def dihomotopy_class(C: PrecubicalSet, s: PathT) -> list[PathT]:
    """The (finite) dihomotopy class of ``s``, sorted."""
    table = _code_table(C)
    src = tuple(_encode(x) for x in s.steps)
    parents, _ = _bfs(lambda q: _tile_moves(table, q), src)
    return sorted(PathT(s.start, tuple(_decode(c) for c in q)) for q in parents)


class HomotopyResult(NamedTuple):
    verdict: str  # "yes", "no" or "unknown"
    witness: list[Move] | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.verdict == "yes"


def _homology_basis(C: PrecubicalSet):
    """Row-reduced rational basis of the boundaries of squares in edge space."""
    cached = C.__dict__.get("_homology_basis")
    if cached is not None:
        return cached
    pivots: dict[int, dict[int, Fraction]] = {}
    for t in tiles(C):
        vec: dict[int, Fraction] = {}
        for e, sgn in ((t.a, 1), (t.b, 1), (t.b2, -1), (t.a2, -1)):
            vec[e] = vec.get(e, Fraction(0)) + sgn
        vec = _reduce(vec, pivots)
        if vec:
            p = min(vec)
            inv = 1 / vec[p]
            pivots[p] = {k: x * inv for k, x in vec.items()}
    C.__dict__["_homology_basis"] = pivots
    return pivots


def _reduce(vec, pivots):
    vec = {k: x for k, x in vec.items() if x}
    for p in sorted(pivots):
        if p in vec:
            f = vec[p]
            for k, x in pivots[p].items():
                vec[k] = vec.get(k, Fraction(0)) - f * x
            vec = {k: x for k, x in vec.items() if x}
    return vec


def homologous(C: PrecubicalSet, s: PathT, t: PathT) -> bool:
    """Whether ``s`` and ``t`` differ by a rational combination of square boundaries.

    Homotopic paths always are, so ``False`` certifies non-homotopy.
    """
    vec: dict[int, Fraction] = {}
    for p, sgn in ((s, 1), (t, -1)):
        for st in p.steps:
            d = -sgn if st.reversed else sgn
            vec[st.edge] = vec.get(st.edge, Fraction(0)) + d
    return not _reduce(vec, _homology_basis(C))


def are_homotopic(C: PrecubicalSet, s: PathT, t: PathT, budget: int = 6) -> HomotopyResult:
    """Bounded search for a homotopy from ``s`` to ``t``.

    Intermediate paths are limited to ``max(|s|, |t|) + budget`` steps.
    The answer is ``"yes"`` with the move sequence when one is found.
    It is ``"no"`` when the two paths differ in rational homology, or when
    the bounded component was exhausted without ever hitting the bound.
    Otherwise it is ``"unknown"``.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    _same_endpoints(C, s, t)
    if s == t:
        return HomotopyResult("yes", [], "identical paths")
    if not homologous(C, s, t):
        return HomotopyResult("no", None, "the paths differ in homology")
    limit = max(len(s), len(t)) + budget
    table, inc = _code_table(C), _code_incidence(C)
    src = tuple(_encode(x) for x in s.steps)
    dst = tuple(_encode(x) for x in t.steps)
    truncated = False

    def expand(q):
        nonlocal truncated
        if len(q) + 2 > limit and C.count(1):
            truncated = True
        return _homotopy_moves(C, table, inc, s.start, q, limit)

    parents, found = _bfs(expand, src, dst)
    if found:
        return HomotopyResult("yes", _trace(parents, dst), f"found within length {limit}")
    if not truncated:
        return HomotopyResult("no", None, "the homotopy class of s was exhausted")
    return HomotopyResult("unknown", None, f"no homotopy within length {limit}")


# ---------------------------------------------------------------------------
# enumeration and geodesics


def dipaths(C: PrecubicalSet, x: int, y: int, len_bound: int) -> list[PathT]:
    """All dipaths from ``x`` to ``y`` with at most ``len_bound`` steps, sorted."""
    out = []
    outgoing = [[s for s in lst if not s.reversed] for lst in C.incidence]

    def rec(v, acc):
        if v == y:
            out.append(PathT(x, tuple(acc)))
        if len(acc) == len_bound:
            return
        for s in outgoing[v]:
            acc.append(s)
            rec(C.tgt(s.edge), acc)
            acc.pop()

    rec(x, [])
    return sorted(out, key=lambda p: (p.key(),))


def dihomotopy_classes(C: PrecubicalSet, x: int, y: int, len_bound: int) -> list[list[PathT]]:
    """Dipaths ``x → y`` of length at most ``len_bound``, grouped by dihomotopy.

    Classes are ordered by their least member (step sequences compared as
    ``(edge, reversed)`` tuples).
    """
    if len_bound < 0:
        raise ValueError("len_bound must be non-negative")
    remaining = set(dipaths(C, x, y, len_bound))
    classes = []
    while remaining:
        rep = min(remaining, key=PathT.key)
        cls = dihomotopy_class(C, rep)
        remaining -= set(cls)
        classes.append(sorted(cls, key=PathT.key))
    classes.sort(key=lambda c: c[0].key())
    return classes


def _has_backtrack(s: PathT) -> bool:
    return any(a.inv() == b for a, b in zip(s.steps, s.steps[1:]))


def is_locally_geodesic(C: PrecubicalSet, s: PathT) -> bool:
    """No path dihomotopic to ``s`` contains a backtrack ``a·ā`` or ``ā·a``."""
    check_path(C, s)
    return not any(_has_backtrack(p) for p in dihomotopy_class(C, s))


def _all_paths(C: PrecubicalSet, x: int, y: int, max_len: int) -> Iterator[PathT]:
    def rec(v, acc):
        if v == y:
            yield PathT(x, tuple(acc))
        if len(acc) == max_len:
            return
        for s in C.incidence[v]:
            acc.append(s)
            yield from rec(C.step_tgt(s), acc)
            acc.pop()

    yield from rec(x, [])


def is_geodesic(C: PrecubicalSet, s: PathT, budget: int = 6) -> HomotopyResult:
    """``"no"`` (with the shorter homotopic path as a one-move witness) when a
    strictly shorter path is homotopic to ``s``; ``"yes"`` when every shorter
    path is certainly not; otherwise ``"unknown"``."""
    check_path(C, s)
    y = path_end(C, s)
    if len(s) == 0:
        return HomotopyResult("yes", None, "empty path")
    unknown = False
    for t in sorted(_all_paths(C, s.start, y, len(s) - 1), key=lambda p: (len(p), p.key())):
        r = are_homotopic(C, s, t, budget)
        if r.verdict == "yes":
            return HomotopyResult("no", r.witness, f"homotopic to a path of length {len(t)}")
        if r.verdict == "unknown":
            unknown = True
    if unknown:
        return HomotopyResult("unknown", None, "some shorter path could not be ruled out")
    return HomotopyResult("yes", None, "no shorter homotopic path")


# ---------------------------------------------------------------------------
# text and JSON forms


def format_path(C: PrecubicalSet, s: PathT) -> str:
    """``x0 -e1-> x1 <-e2- x2 …``"""
    parts = [C.name(0, s.start)]
    v = s.start
    for st in s.steps:
        v = C.step_tgt(st)
        e = C.name(1, st.edge)
        parts.append(f"<-{e}-" if st.reversed else f"-{e}->")
        parts.append(C.name(0, v))
    return " ".join(parts)


_ARROW = re.compile(r"^(?:-(?P<fwd>.+)->|<-(?P<bwd>.+)-)$")


def parse_path(C: PrecubicalSet, text: str) -> PathT:
    """Inverse of :func:`format_path`; cells may be given by name or id."""
    toks = text.split()
    if not toks or len(toks) % 2 == 0:
        raise InvalidPath(f"malformed path {text!r}")
    try:
        start = C.lookup(0, toks[0])
        steps = []
        for k in range(1, len(toks), 2):
            m = _ARROW.match(toks[k])
            if not m:
                raise InvalidPath(f"malformed arrow {toks[k]!r}")
            name = m.group("fwd") or m.group("bwd")
            steps.append(Step(C.lookup(1, name), m.group("bwd") is not None))
            v = C.lookup(0, toks[k + 1])
            if C.step_tgt(steps[-1]) != v:
                raise InvalidPath(f"arrow {toks[k]!r} does not end at {toks[k + 1]!r}")
    except KeyError as exc:
        raise InvalidPath(str(exc)) from None
    p = PathT(start, tuple(steps))
    check_path(C, p)
    return p


def path_to_json(C: PrecubicalSet, s: PathT) -> dict:
    return {"start": C.name(0, s.start), "steps": [[C.name(1, st.edge), st.reversed] for st in s.steps]}


def path_from_json(C: PrecubicalSet, data) -> PathT:
    def cell(n, x):
        return int(x) if isinstance(x, int) else C.lookup(n, str(x))

    try:
        p = PathT(cell(0, data["start"]), tuple(Step(cell(1, e), bool(r)) for e, r in data["steps"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPath(f"malformed path: {exc}") from None
    check_path(C, p)
    return p
