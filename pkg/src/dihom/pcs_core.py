"""Finite precubical sets.

Cells are dense integer ids per dimension and face maps are stored as
tuples, so ``neg[n][i][c]`` is the negative ``i``-th face of the
``(n+1)``-cell ``c``.  Everything here is immutable; constructions return
new objects.
"""
from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Mapping, NamedTuple, Sequence

SIGNS = ("-", "+")
DEFAULT_MAX_DIM = 6


def max_dim() -> int:
    """Dimension bound for generated cubes (``DIHOM_MAX_DIM`` overrides)."""
    env = os.environ.get("DIHOM_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


class DimensionBoundError(ValueError):
    pass


class MorphismError(ValueError):
    pass


class Cell(NamedTuple):
    dim: int
    index: int


class Step(NamedTuple):
    """An edge traversed forwards, or backwards when ``reversed`` is set."""

    edge: int
    reversed: bool = False

    def inv(self) -> "Step":
        return Step(self.edge, not self.reversed)


class Violation(NamedTuple):
    kind: str
    n: int
    i: int
    j: int
    eps: str
    eps2: str
    cell: int


def _word_key(w: str):
    return tuple("-0+".index(ch) for ch in w)


@dataclass(frozen=True)
class PrecubicalSet:
    cells: tuple[int, ...]
    neg: tuple[tuple[tuple[int, ...], ...], ...]
    pos: tuple[tuple[tuple[int, ...], ...], ...]
    labels: Mapping[int, str] = field(default_factory=dict)
    names: tuple[tuple[str, ...], ...] | None = None

    @staticmethod
    def build(cells, neg, pos, labels=None, names=None) -> "PrecubicalSet":
        cells = tuple(int(c) for c in cells) or (0,)
        neg = tuple(tuple(tuple(int(x) for x in arr) for arr in level) for level in neg)
        pos = tuple(tuple(tuple(int(x) for x in arr) for arr in level) for level in pos)
        labels = {int(k): str(v) for k, v in (labels or {}).items()}
        if names is not None:
            names = tuple(tuple(str(x) for x in level) for level in names)
        return PrecubicalSet(cells, neg, pos, labels, names)

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    def count(self, n: int) -> int:
        return self.cells[n] if 0 <= n < len(self.cells) else 0

    def face(self, n: int, c: int, i: int, sign: str) -> int:
        """``∂^sign_i`` of the ``n``-cell ``c``."""
        table = self.neg if sign == "-" else self.pos
        return table[n - 1][i][c]

    def src(self, e: int) -> int:
        return self.neg[0][0][e]

    def tgt(self, e: int) -> int:
        return self.pos[0][0][e]

    def step_src(self, s: Step) -> int:
        return self.tgt(s.edge) if s.reversed else self.src(s.edge)

    def step_tgt(self, s: Step) -> int:
        return self.src(s.edge) if s.reversed else self.tgt(s.edge)

    def name(self, n: int, c: int) -> str:
        if self.names is not None and n < len(self.names):
            return self.names[n][c]
        if n == 0:
            return str(c)
        if n == 1:
            return f"e{c}"
        if n == 2:
            return f"s{c}"
        return f"c{n}_{c}"

    def all_names(self, n: int) -> tuple[str, ...]:
        return tuple(self.name(n, c) for c in range(self.count(n)))

    def lookup(self, n: int, name: str) -> int:
        """Cell id from a name (or from a decimal id)."""
        table = self._name_index[n] if n < len(self._name_index) else {}
        if name in table:
            return table[name]
        if name.isdigit() and int(name) < self.count(n):
            return int(name)
        raise KeyError(f"no {n}-cell named {name!r}")

    @cached_property
    def _name_index(self):
        return [{self.name(n, c): c for c in range(self.count(n))} for n in range(len(self.cells))]

    def face_tuple(self, n: int, c: int) -> tuple[int, ...]:
        """All faces of an ``n``-cell ordered as (∂⁻₀, ∂⁺₀, ∂⁻₁, ...)."""
        return tuple(
            self.face(n, c, i, s) for i in range(n) for s in SIGNS
        )

    @cached_property
    def fillers(self) -> list[dict[tuple[int, ...], list[int]]]:
        """Per dimension, boundary tuple -> cells having that boundary."""
        out: list[dict] = [dict()]
        for n in range(1, len(self.cells)):
            idx: dict[tuple[int, ...], list[int]] = {}
            for c in range(self.cells[n]):
                idx.setdefault(self.face_tuple(n, c), []).append(c)
            out.append(idx)
        return out

    @cached_property
    def vertex_sets(self) -> list[list[frozenset[int]]]:
        """Set of vertices that are iterated faces of each cell."""
        out = [[frozenset([v]) for v in range(self.count(0))]]
        for n in range(1, len(self.cells)):
            prev = out[-1]
            level = []
            for c in range(self.cells[n]):
                acc = set()
                for i in range(n):
                    acc |= prev[self.face(n, c, i, "-")]
                    acc |= prev[self.face(n, c, i, "+")]
                level.append(frozenset(acc))
            out.append(level)
        return out

    @cached_property
    def incidence(self) -> list[list[Step]]:
        """Per vertex, the steps leaving it (forward edges out, reversed edges in)."""
        out: list[list[Step]] = [[] for _ in range(self.count(0))]
        for e in range(self.count(1)):
            out[self.src(e)].append(Step(e, False))
            out[self.tgt(e)].append(Step(e, True))
        for lst in out:
            lst.sort()
        return out

    def __repr__(self) -> str:
        return f"PrecubicalSet(cells={list(self.cells)})"


# ---------------------------------------------------------------------------
# validation


def validate(C: PrecubicalSet) -> list[Violation]:
    """Every violated structural constraint, face relation or label condition."""
    out: list[Violation] = []
    for n in range(C.dim):
        for table, s in ((C.neg, "-"), (C.pos, "+")):
            if n >= len(table) or len(table[n]) != n + 1:
                out.append(Violation("structure", n, -1, -1, s, s, -1))
                continue
            for i, arr in enumerate(table[n]):
                if len(arr) != C.cells[n + 1]:
                    out.append(Violation("structure", n, i, -1, s, s, -1))
                    continue
                for c, x in enumerate(arr):
                    if not 0 <= x < C.cells[n]:
                        out.append(Violation("structure", n, i, -1, s, s, c))
    if out:
        return out
    # ∂^e_j ∂^e'_i = ∂^e'_i ∂^e_{j+1} for i <= j on (n+2)-cells
    for n in range(C.dim - 1):
        for c in range(C.cells[n + 2]):
            for i in range(n + 1):
                for j in range(i, n + 1):
                    for e in SIGNS:
                        for e2 in SIGNS:
                            lhs = C.face(n + 1, C.face(n + 2, c, i, e2), j, e)
                            rhs = C.face(n + 1, C.face(n + 2, c, j + 1, e), i, e2)
                            if lhs != rhs:
                                out.append(Violation("relation", n, i, j, e, e2, c))
    if C.labels and C.dim >= 2:
        for a in range(C.cells[2]):
            for i in range(2):
                l1 = C.labels.get(C.face(2, a, i, "-"))
                l2 = C.labels.get(C.face(2, a, i, "+"))
                if l1 != l2:
                    out.append(Violation("label", 1, i, i, "-", "+", a))
    return out


# ---------------------------------------------------------------------------
# standard cubes and their subcomplexes


def _check_bound(n: int, bound: int | None) -> None:
    limit = max_dim() if bound is None else bound
    if n < 0:
        raise ValueError("dimension must be non-negative")
    if n > limit:
        raise DimensionBoundError(f"dimension {n} exceeds bound {limit}")


@lru_cache(maxsize=None)
def _cube(n: int) -> PrecubicalSet:
    words = ["".join(w) for w in itertools.product("-0+", repeat=n)]
    by_dim: list[list[str]] = [[] for _ in range(n + 1)]
    for w in sorted(words, key=_word_key):
        by_dim[w.count("0")].append(w)
    index = [{w: k for k, w in enumerate(level)} for level in by_dim]
    neg, pos = [], []
    for k in range(n):
        nl, pl = [], []
        for i in range(k + 1):
            for table, s in ((nl, "-"), (pl, "+")):
                row = []
                for w in by_dim[k + 1]:
                    zeros = [p for p, ch in enumerate(w) if ch == "0"]
                    p = zeros[i]
                    row.append(index[k][w[:p] + s + w[p + 1:]])
                table.append(row)
        neg.append(nl)
        pos.append(pl)
    return PrecubicalSet.build([len(l) for l in by_dim], neg, pos, names=by_dim)


def standard_cube(n: int, bound: int | None = None) -> PrecubicalSet:
    """The standard ``n``-cube ``Yn``; cells are named by words over ``-0+``."""
    _check_bound(n, bound)
    return _cube(n)


def subcomplex(C: PrecubicalSet, keep: Sequence[set[int] | frozenset[int]]):
    """Restrict ``C`` to the kept cells, renumbering in order.

    Returns the subcomplex and, per dimension, the map old id -> new id.
    """
    keep = [set(keep[n]) if n < len(keep) else set() for n in range(len(C.cells))]
    maps = []
    for n in range(len(C.cells)):
        maps.append({c: k for k, c in enumerate(sorted(keep[n]))})
    neg, pos = [], []
    for n in range(C.dim):
        nl, pl = [], []
        for i in range(n + 1):
            for table, s in ((nl, "-"), (pl, "+")):
                row = []
                for c in sorted(keep[n + 1]):
                    f = C.face(n + 1, c, i, s)
                    if f not in maps[n]:
                        raise ValueError(f"kept cell ({n + 1},{c}) has a removed face")
                    row.append(maps[n][f])
                table.append(row)
        neg.append(nl)
        pos.append(pl)
    labels = {maps[1][e]: l for e, l in C.labels.items() if len(maps) > 1 and e in maps[1]}
    names = None
    if C.names is not None:
        names = [[C.names[n][c] for c in sorted(keep[n])] for n in range(len(C.cells))]
    return PrecubicalSet.build([len(m) for m in maps], neg, pos, labels, names), maps


def hollow_cube(n: int, bound: int | None = None) -> PrecubicalSet:
    """``∂Yn``: the standard cube without its top cell."""
    Y = standard_cube(n, bound)
    keep = [set(range(Y.count(k))) for k in range(n)] + [set()]
    return subcomplex(Y, keep)[0]


def _word_cells(C: PrecubicalSet, pred) -> list[set[int]]:
    return [
        {c for c in range(C.count(n)) if pred(C.name(n, c))}
        for n in range(len(C.cells))
    ]


def lambda_complex(u: str) -> PrecubicalSet:
    """``Λ^u``: cubes of ``∂Yn`` sharing at least one letter with ``u``."""
    n = len(u)
    if n < 1 or set(u) - set(SIGNS):
        raise ValueError("u must be a non-empty word over '-+'")
    Y = standard_cube(n)
    return subcomplex(Y, _word_cells(Y, lambda w: any(a == b for a, b in zip(w, u))))[0]


def lambda_complex_by_removal(u: str) -> PrecubicalSet:
    """``∂Yn`` minus every cube having the opposite corner of ``u`` as a face."""
    H = hollow_cube(len(u))
    opposite = "".join("+" if ch == "-" else "-" for ch in u)
    return remove_vertices(H, {H.lookup(0, opposite)})


def iterated_face(C: PrecubicalSet, c: int, u: str) -> int:
    """``∂^u(c)`` for the ``len(u)``-cell ``c``; the result has dimension ``u.count('0')``.

    The composite is ``∂_0^{u_0} ∘ … ∘ ∂_{n-1}^{u_{n-1}}``, so the highest
    axis is removed first and lower axis indices stay valid.
    """
    if set(u) - set("-0+"):
        raise ValueError(f"malformed face word {u!r}")
    n = len(u)
    if n > C.dim or not 0 <= c < C.count(n):
        raise ValueError(f"no {n}-cell {c}")
    cur, d = c, n
    for i in range(n - 1, -1, -1):
        if u[i] != "0":
            cur = C.face(d, cur, i, u[i])
            d -= 1
    return cur


def from_cells(vertices, edges, squares=(), labels=None) -> PrecubicalSet:
    """Build a complex of dimension at most 2 from named cells.

    ``edges`` are ``(name, source, target)`` and ``squares`` are
    ``(name, (∂⁻₀, ∂⁺₀, ∂⁻₁, ∂⁺₁))`` with faces given by name.
    """
    vid = {v: k for k, v in enumerate(vertices)}
    eid = {e[0]: k for k, e in enumerate(edges)}
    neg = [[[vid[e[1]] for e in edges]]]
    pos = [[[vid[e[2]] for e in edges]]]
    names = [list(vertices), [e[0] for e in edges]]
    cells = [len(vertices), len(edges)]
    if squares:
        neg.append([[eid[f[0]] for _, f in squares], [eid[f[2]] for _, f in squares]])
        pos.append([[eid[f[1]] for _, f in squares], [eid[f[3]] for _, f in squares]])
        names.append([q[0] for q in squares])
        cells.append(len(squares))
    lab = {eid[k]: v for k, v in (labels or {}).items()}
    C = PrecubicalSet.build(cells, neg, pos, lab, names)
    problems = validate(C)
    if problems:
        raise ValueError(f"invalid precubical set: {problems[:3]}")
    return C


# ---------------------------------------------------------------------------
# tensor product and colimits


def _materialized_names(C: PrecubicalSet):
    return [list(C.all_names(n)) for n in range(len(C.cells))]


def _is_word(s: str) -> bool:
    return set(s) <= set("-0+")


def _tensor_layout(C: PrecubicalSet, D: PrecubicalSet):
    """Cells of ``C ⊗ D`` per dimension as ``(i, c, d)``, and their id function."""
    top = C.dim + D.dim
    blocks: list[list[tuple[int, int, int]]] = []
    offset: dict[tuple[int, int], int] = {}
    for n in range(top + 1):
        level = []
        for i in range(max(0, n - D.dim), min(n, C.dim) + 1):
            offset[(n, i)] = len(level)
            level.extend((i, c, d) for c in range(C.count(i)) for d in range(D.count(n - i)))
        blocks.append(level)

    def cell_id(n, i, c, d):
        return offset[(n, i)] + c * D.count(n - i) + d

    return blocks, cell_id


def tensor(C: PrecubicalSet, D: PrecubicalSet) -> PrecubicalSet:
    """``C ⊗ D``; cells of dimension ``n`` are pairs in ``C(i) × D(n-i)``."""
    top = C.dim + D.dim
    blocks, cell_id = _tensor_layout(C, D)

    neg, pos = [], []
    for n in range(top):
        nl, pl = [], []
        for k in range(n + 1):
            for table, s in ((nl, "-"), (pl, "+")):
                row = []
                for i, c, d in blocks[n + 1]:
                    if k < i:
                        row.append(cell_id(n, i - 1, C.face(i, c, k, s), d))
                    else:
                        row.append(cell_id(n, i, c, D.face(n + 1 - i, d, k - i, s)))
                table.append(row)
        neg.append(nl)
        pos.append(pl)
    labels = {}
    if top >= 1:
        for e, (i, c, d) in enumerate(blocks[1]):
            lab = C.labels.get(c) if i == 1 else D.labels.get(d)
            if lab is not None:
                labels[e] = lab
    names = None
    if C.names is not None or D.names is not None:
        names = []
        for n in range(top + 1):
            row = []
            for i, c, d in blocks[n]:
                a, b = C.name(i, c), D.name(n - i, d)
                row.append(a + b if _is_word(a) and _is_word(b) else f"({a},{b})")
            names.append(row)
    return PrecubicalSet.build([len(b) for b in blocks], neg, pos, labels, names)


def tensor_morphism(f: "PcsMorphism", g: "PcsMorphism") -> "PcsMorphism":
    """``f ⊗ g`` between the tensor products of sources and targets."""
    src, tgt = tensor(f.source, g.source), tensor(f.target, g.target)
    blocks, _ = _tensor_layout(f.source, g.source)
    _, tgt_id = _tensor_layout(f.target, g.target)
    maps = tuple(
        tuple(tgt_id(n, i, f.maps[i][c], g.maps[n - i][d]) for i, c, d in level)
        for n, level in enumerate(blocks)
    )
    return PcsMorphism(src, tgt, maps)


def tensor_vertex(C: PrecubicalSet, D: PrecubicalSet, x: int, y: int) -> int:
    """Id in ``C ⊗ D`` of the vertex ``(x, y)``."""
    return x * D.count(0) + y


def coproduct(C: PrecubicalSet, D: PrecubicalSet) -> PrecubicalSet:
    """Disjoint union; ``D``'s cells follow ``C``'s in each dimension."""
    top = max(C.dim, D.dim)
    cells = [C.count(n) + D.count(n) for n in range(top + 1)]
    neg, pos = [], []
    for n in range(top):
        nl, pl = [], []
        for i in range(n + 1):
            for table, s in ((nl, "-"), (pl, "+")):
                row = [C.face(n + 1, c, i, s) for c in range(C.count(n + 1))]
                row += [C.count(n) + D.face(n + 1, d, i, s) for d in range(D.count(n + 1))]
                table.append(row)
        neg.append(nl)
        pos.append(pl)
    labels = dict(C.labels)
    labels.update({C.count(1) + e: l for e, l in D.labels.items()})
    names = None
    if C.names is not None or D.names is not None:
        names = [list(C.all_names(n)) + list(D.all_names(n)) for n in range(top + 1)]
    return PrecubicalSet.build(cells, neg, pos, labels, names)


def quotient_vertices(C: PrecubicalSet, pairs) -> tuple[PrecubicalSet, dict[int, int]]:
    """Identify vertices pairwise; returns the quotient and the vertex map.

    Classes are numbered by their smallest original vertex.  Only vertices
    are merged, so higher cells keep their ids.
    """
    parent = list(range(C.count(0)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in pairs:
        if not (0 <= x < C.count(0) and 0 <= y < C.count(0)):
            raise ValueError(f"invalid vertex in pair ({x},{y})")
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    roots = sorted({find(v) for v in range(C.count(0))})
    new = {r: k for k, r in enumerate(roots)}
    vmap = {v: new[find(v)] for v in range(C.count(0))}
    neg = [list(level) for level in C.neg]
    pos = [list(level) for level in C.pos]
    if C.dim >= 1:
        neg[0] = [[vmap[v] for v in C.neg[0][0]]]
        pos[0] = [[vmap[v] for v in C.pos[0][0]]]
    cells = [len(roots)] + list(C.cells[1:])
    names = None
    if C.names is not None:
        names = [[C.names[0][r] for r in roots]] + [list(l) for l in C.names[1:]]
    return PrecubicalSet.build(cells, neg, pos, C.labels, names), vmap


def glue_vertices(C: PrecubicalSet, x: int, y: int) -> PrecubicalSet:
    """``C[x=y]``."""
    return quotient_vertices(C, [(x, y)])[0]


def remove_vertices(C: PrecubicalSet, X) -> PrecubicalSet:
    """``C∖X``: keep exactly the cubes with no vertex of ``X`` as iterated face."""
    return remove_vertices_with_maps(C, X)[0]


def remove_vertices_with_maps(C: PrecubicalSet, X):
    X = set(X)
    bad = [x for x in X if not 0 <= x < C.count(0)]
    if bad:
        raise ValueError(f"invalid vertex ids {bad}")
    keep = [
        {c for c, vs in enumerate(C.vertex_sets[n]) if not (vs & X)}
        for n in range(len(C.cells))
    ]
    return subcomplex(C, keep)


def truncate(C: PrecubicalSet, n: int) -> PrecubicalSet:
    """Forget all cells of dimension above ``n``."""
    if n >= C.dim:
        return C
    names = None if C.names is None else C.names[: n + 1]
    labels = C.labels if n >= 1 else {}
    return PrecubicalSet.build(C.cells[: n + 1], C.neg[:n], C.pos[:n], labels, names)


def complete(C: PrecubicalSet, dmax: int) -> PrecubicalSet:
    """Add one ``k``-cube per hollow ``k``-cube of the current complex, ``k = 3..dmax``."""
    cur = truncate(C, 2)
    for k in range(3, dmax + 1):
        H = hollow_cube(k, bound=max(dmax, max_dim()))
        morphs = list(iter_morphisms(H, cur))
        if not morphs:
            break
        face_ids = {}
        for i in range(k):
            for s in SIGNS:
                face_ids[(i, s)] = H.lookup(k - 1, "0" * i + s + "0" * (k - 1 - i))
        new_neg = [[h.maps[k - 1][face_ids[(i, "-")]] for h in morphs] for i in range(k)]
        new_pos = [[h.maps[k - 1][face_ids[(i, "+")]] for h in morphs] for i in range(k)]
        cells = list(cur.cells) + [0] * (k - 1 - cur.dim)
        cells.append(len(morphs))
        neg = [list(l) for l in cur.neg] + [[[] for _ in range(m + 1)] for m in range(cur.dim, k - 1)]
        pos = [list(l) for l in cur.pos] + [[[] for _ in range(m + 1)] for m in range(cur.dim, k - 1)]
        neg.append(new_neg)
        pos.append(new_pos)
        names = None
        if cur.names is not None:
            names = [list(l) for l in cur.names] + [[] for _ in range(cur.dim + 1, k)]
            names.append([f"c{k}_{j}" for j in range(len(morphs))])
        cur = PrecubicalSet.build(cells, neg, pos, cur.labels, names)
    return _trim(cur, C.dim)


def _trim(C: PrecubicalSet, floor: int) -> PrecubicalSet:
    top = C.dim
    while top > floor and C.cells[top] == 0:
        top -= 1
    return truncate(C, top)


# ---------------------------------------------------------------------------
# morphisms and lifting


@dataclass(frozen=True)
class PcsMorphism:
    source: PrecubicalSet
    target: PrecubicalSet
    maps: tuple[tuple[int, ...], ...]

    def __call__(self, n: int, c: int) -> int:
        return self.maps[n][c]

    def key(self) -> tuple[int, ...]:
        return tuple(itertools.chain.from_iterable(self.maps))

    def errors(self) -> list[str]:
        """Why this is not a morphism (empty when it is one)."""
        D, C = self.source, self.target
        out = []
        for n in range(len(D.cells)):
            if D.count(n) == 0:
                continue
            if n >= len(self.maps) or len(self.maps[n]) != D.count(n):
                out.append(f"missing map in dimension {n}")
                continue
            for c in range(D.count(n)):
                if not 0 <= self.maps[n][c] < C.count(n):
                    out.append(f"cell ({n},{c}) mapped outside target")
        if out:
            return out
        for n in range(1, len(D.cells)):
            for c in range(D.count(n)):
                for i in range(n):
                    for s in SIGNS:
                        if self.maps[n - 1][D.face(n, c, i, s)] != C.face(n, self.maps[n][c], i, s):
                            out.append(f"face {s}{i} of ({n},{c}) not preserved")
        if D.labels and C.labels:
            for e, lab in D.labels.items():
                if C.labels.get(self.maps[1][e]) != lab:
                    out.append(f"label of edge {e} not preserved")
        return out


def search_presheaf(D_counts, D_faces, C_counts, C_faces, partial=None, allowed=None) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Enumerate face-preserving maps between two finite "face presheaves".

    ``X_faces[m]`` is a list of arrays sending level ``m`` cells to level
    ``m-1`` cells; a map must commute with every array at the same slot.
    This covers precubical sets (slots ordered (i, sign)) and presimplicial
    sets.  Cells are chosen top-down, and choosing a cell forces all of its
    iterated faces, so most cells are never branched on.
    ``allowed(m, d, c)`` may veto individual assignments.
    """
    top = len(D_counts) - 1
    assign = [[-1] * D_counts[m] for m in range(top + 1)]
    c_count = lambda m: C_counts[m] if m < len(C_counts) else 0
    by_slot: dict[tuple[int, int], dict[int, list[int]]] = {}

    def slot_index(m, j):
        key = (m, j)
        if key not in by_slot:
            idx: dict[int, list[int]] = {}
            for c, v in enumerate(C_faces[m][j]):
                idx.setdefault(v, []).append(c)
            by_slot[key] = idx
        return by_slot[key]

    trail: list[tuple[int, int]] = []

    def put(m, d, c) -> bool:
        stack = [(m, d, c)]
        while stack:
            m, d, c = stack.pop()
            cur = assign[m][d]
            if cur == c:
                continue
            if cur != -1:
                return False
            if allowed is not None and not allowed(m, d, c):
                return False
            assign[m][d] = c
            trail.append((m, d))
            if m > 0:
                for j, arr in enumerate(D_faces[m]):
                    stack.append((m - 1, arr[d], C_faces[m][j][c]))
        return True

    def undo(mark):
        while len(trail) > mark:
            m, d = trail.pop()
            assign[m][d] = -1

    for m in range(top + 1):
        if D_counts[m] and c_count(m) == 0:
            return
    if partial:
        for (m, d), c in sorted(partial.items()):
            if not 0 <= c < c_count(m) or not put(m, d, c):
                return

    order = [(m, d) for m in range(top, -1, -1) for d in range(D_counts[m])]

    def candidates(m, d):
        if m == 0:
            return range(c_count(0))
        fixed = []
        for j, arr in enumerate(D_faces[m]):
            v = assign[m - 1][arr[d]]
            if v != -1:
                fixed.append((j, v))
        if not fixed:
            return range(c_count(m))
        j0, v0 = fixed[0]
        base = slot_index(m, j0).get(v0, [])
        return [c for c in base if all(C_faces[m][j][c] == v for j, v in fixed[1:])]

    def rec(pos):
        while pos < len(order) and assign[order[pos][0]][order[pos][1]] != -1:
            pos += 1
        if pos == len(order):
            yield tuple(tuple(level) for level in assign)
            return
        m, d = order[pos]
        for c in candidates(m, d):
            mark = len(trail)
            if put(m, d, c):
                yield from rec(pos + 1)
            undo(mark)

    yield from rec(0)


def _slots(K: PrecubicalSet):
    return [[]] + [
        [(K.neg if s == "-" else K.pos)[m - 1][i] for i in range(m) for s in SIGNS]
        for m in range(1, len(K.cells))
    ]


def _normalize_partial(partial) -> dict[tuple[int, int], int]:
    out = {}
    for k, v in (partial or {}).items():
        out[(int(k[0]), int(k[1]))] = int(v)
    return out


def iter_morphisms(D: PrecubicalSet, C: PrecubicalSet, partial=None) -> Iterator[PcsMorphism]:
    """Morphisms ``D → C`` extending ``partial`` (search order, unsorted)."""
    allowed = None
    if D.labels and C.labels:
        def allowed(m, d, c):
            return m != 1 or d not in D.labels or C.labels.get(c) == D.labels[d]
    for maps in search_presheaf(D.cells, _slots(D), C.cells, _slots(C), _normalize_partial(partial), allowed):
        yield PcsMorphism(D, C, maps)


def find_morphisms(D: PrecubicalSet, C: PrecubicalSet, partial=None) -> list[PcsMorphism]:
    """All morphisms ``D → C`` extending ``partial``.

    ``partial`` maps ``(dim, id)`` of ``D`` to ids of ``C``.  The result is
    sorted lexicographically on the images listed in increasing (dim, id)
    order of the cells of ``D``.
    """
    return sorted(iter_morphisms(D, C, partial), key=PcsMorphism.key)


def find_isomorphism(C: PrecubicalSet, D: PrecubicalSet) -> PcsMorphism | None:
    """Some bijective morphism ``C → D`` (labels respected), or None."""
    if _trim(C, 0).cells != _trim(D, 0).cells:
        return None
    for m in iter_morphisms(C, D):
        if all(len(set(level)) == len(level) for level in m.maps):
            return m
    return None


def is_isomorphic(C: PrecubicalSet, D: PrecubicalSet) -> bool:
    return find_isomorphism(C, D) is not None


class LiftStatus(NamedTuple):
    count: int  # 0, 1, or 2 meaning "at least two"
    witnesses: list

    @property
    def at_least_once(self) -> bool:
        return self.count >= 1

    @property
    def at_most_once(self) -> bool:
        return self.count <= 1

    @property
    def uniquely(self) -> bool:
        return self.count == 1


def lift_status(C: PrecubicalSet, incl: PcsMorphism, h: PcsMorphism, limit: int = 2) -> LiftStatus:
    """Count extensions ``g: E → C`` of ``h: D → C`` along ``incl: D → E``."""
    errs = h.errors()
    if errs:
        raise MorphismError("; ".join(errs))
    if h.target is not C and h.target != C:
        raise MorphismError("h does not land in C")
    D = incl.source
    partial = {}
    for n in range(len(D.cells)):
        for d in range(D.count(n)):
            key = (n, incl.maps[n][d])
            val = h.maps[n][d]
            if partial.get(key, val) != val:
                return LiftStatus(0, [])
            partial[key] = val
    found = list(itertools.islice(iter_morphisms(incl.target, C, partial), limit))
    return LiftStatus(len(found), found)


def inclusion(D: PrecubicalSet, E: PrecubicalSet) -> PcsMorphism:
    """The inclusion of one named subcomplex into another, matching names."""
    maps = tuple(
        tuple(E.lookup(n, D.name(n, d)) for d in range(D.count(n)))
        for n in range(len(D.cells))
    )
    m = PcsMorphism(D, E, maps)
    errs = m.errors()
    if errs:
        raise MorphismError("; ".join(errs))
    return m


@lru_cache(maxsize=None)
def lambda_in_cube(u: str) -> PcsMorphism:
    """``Λ^u ↪ Yn``."""
    return inclusion(lambda_complex(u), standard_cube(len(u)))


@lru_cache(maxsize=None)
def lambda_in_hollow(u: str) -> PcsMorphism:
    """``Λ^u ↪ ∂Yn``."""
    return inclusion(lambda_complex(u), hollow_cube(len(u)))


@lru_cache(maxsize=None)
def hollow_in_cube(n: int) -> PcsMorphism:
    """``∂Yn ↪ Yn``."""
    return inclusion(hollow_cube(n), standard_cube(n))


# ---------------------------------------------------------------------------
# tiles


class Tile(NamedTuple):
    """A square read as ``a·b ⋄ b2·a2``."""

    square: int
    a: int
    b: int
    b2: int
    a2: int

    def oriented(self) -> list[tuple[Step, Step, Step, Step]]:
        """The four oriented forms on possibly reversed steps, and their mirrors."""
        a, b, b2, a2 = (Step(x) for x in (self.a, self.b, self.b2, self.a2))
        base = [
            (a, b, b2, a2),
            (b.inv(), a.inv(), a2.inv(), b2.inv()),
            (a.inv(), b2, b, a2.inv()),
            (b2.inv(), a, a2, b.inv()),
        ]
        return base + [(q[2], q[3], q[0], q[1]) for q in base]


def tiles(C: PrecubicalSet) -> list[Tile]:
    """One tile per square: ``a=∂⁻₀, b=∂⁺₁, b2=∂⁻₁, a2=∂⁺₀``."""
    if C.dim < 2:
        return []
    return [
        Tile(s, C.face(2, s, 0, "-"), C.face(2, s, 1, "+"), C.face(2, s, 1, "-"), C.face(2, s, 0, "+"))
        for s in range(C.cells[2])
    ]


# ---------------------------------------------------------------------------
# serialization


def to_json(C: PrecubicalSet) -> dict:
    out = {
        "dim": C.dim,
        "cells": list(C.cells),
        "faces": {
            "neg": [[list(a) for a in level] for level in C.neg],
            "pos": [[list(a) for a in level] for level in C.pos],
        },
        "labels": {str(k): v for k, v in sorted(C.labels.items())},
    }
    if C.names is not None:
        out["names"] = [list(l) for l in C.names]
    return out


def from_json(data: Mapping) -> PrecubicalSet:
    cells = data["cells"]
    if "dim" in data and data["dim"] != len(cells) - 1:
        raise ValueError("dim does not match the cells list")
    faces = data.get("faces", {"neg": [], "pos": []})
    C = PrecubicalSet.build(cells, faces["neg"], faces["pos"], data.get("labels"), data.get("names"))
    problems = validate(C)
    if problems:
        raise ValueError(f"invalid precubical set: {problems[:3]}")
    return C


def dumps(C: PrecubicalSet) -> str:
    return json.dumps(to_json(C), sort_keys=True)


def to_dot(C: PrecubicalSet, name: str = "C") -> str:
    """1-skeleton as a DOT digraph; squares are listed as comments."""
    lines = [f"digraph {name} {{"]
    for v in range(C.count(0)):
        lines.append(f'  v{v} [label="{C.name(0, v)}"];')
    for e in range(C.count(1)):
        text = C.name(1, e)
        if e in C.labels:
            text += f": {C.labels[e]}"
        lines.append(f'  v{C.src(e)} -> v{C.tgt(e)} [label="{text}"];')
    for t in tiles(C):
        lines.append(
            f"  // square {C.name(2, t.square)}: "
            f"{C.name(1, t.a)}.{C.name(1, t.b)} ~ {C.name(1, t.b2)}.{C.name(1, t.a2)}"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
