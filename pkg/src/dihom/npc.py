"""Geometricity, cube property, unique fillings, links and flagness.

A precubical set is non-positively curved (NPC) when it is geometric, has
the cube property and fills every hollow ``k``-cube exactly once for
``k >= 3``.  For geometric complexes this is equivalent to every vertex link
being flag; :func:`npc_verdict` computes both sides and compares them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .pcs_core import (
    SIGNS,
    PrecubicalSet,
    hollow_cube,
    iter_morphisms,
    iterated_face,
    lambda_in_cube,
    lambda_in_hollow,
    lift_status,
    truncate,
)
from .pcs_core import search_presheaf

SQUARE_TEMPLATES = ("-+", "+-", "--", "++")
CUBE_TEMPLATES = ("+-+", "-+-", "---", "+++")


# ---------------------------------------------------------------------------
# presimplicial sets


@dataclass(frozen=True)
class PresimplicialSet:
    """Augmented presimplicial set: ``faces[n][i]`` maps level ``n+1`` to level ``n``."""

    counts: tuple[int, ...]
    faces: tuple[tuple[tuple[int, ...], ...], ...]
    names: tuple[tuple[str, ...], ...] | None = None

    @property
    def top(self) -> int:
        """Highest populated level (-1 when empty)."""
        for n in range(len(self.counts) - 1, -1, -1):
            if self.counts[n]:
                return n
        return -1

    def count(self, n: int) -> int:
        return self.counts[n] if 0 <= n < len(self.counts) else 0

    def face(self, n: int, x: int, i: int) -> int:
        """``∂_i`` of the level-``n`` simplex ``x``."""
        return self.faces[n - 1][i][x]

    def slots(self):
        return [[]] + [list(self.faces[n - 1]) for n in range(1, len(self.counts))]

    def name(self, n: int, x: int) -> str:
        if self.names is not None:
            return self.names[n][x]
        return f"{n}:{x}"


def validate_presimplicial(S: PresimplicialSet) -> list[tuple[int, int, int, int]]:
    """Violations ``(n, i, j, x)`` of ``∂_i ∂_j = ∂_{j-1} ∂_i`` for ``i < j``."""
    out = []
    for n in range(len(S.counts) - 2):
        for x in range(S.count(n + 2)):
            for j in range(n + 2):
                for i in range(j):
                    if S.face(n + 1, S.face(n + 2, x, j), i) != S.face(n + 1, S.face(n + 2, x, i), j - 1):
                        out.append((n, i, j, x))
    return out


@lru_cache(maxsize=None)
def simplex(n: int, hollow: bool = False) -> PresimplicialSet:
    """``Zn`` (subsets of ``{0..n-1}``), or ``∂Zn`` without the top subset."""
    levels = [list(itertools.combinations(range(n), k)) for k in range(n + 1)]
    if hollow:
        levels[-1] = []
    index = [{s: i for i, s in enumerate(level)} for level in levels]
    faces = []
    for k in range(n):
        faces.append(tuple(
            tuple(index[k][s[:i] + s[i + 1:]] for s in levels[k + 1])
            for i in range(k + 1)
        ))
    names = tuple(tuple("{" + ",".join(map(str, s)) + "}" for s in level) for level in levels)
    return PresimplicialSet(tuple(len(l) for l in levels), tuple(faces), names)


def _signs(n: int):
    return ["".join(u) for u in itertools.product(SIGNS, repeat=n)]


def _link(C: PrecubicalSet, x: int | None) -> PresimplicialSet:
    levels: list[list[tuple[str, int]]] = []
    for n in range(len(C.cells)):
        level = []
        for y in range(C.count(n)):
            for u in _signs(n):
                if x is None or iterated_face(C, y, u) == x:
                    level.append((u, y))
        levels.append(level)
    while len(levels) > 1 and not levels[-1]:
        levels.pop()
    index = [{s: k for k, s in enumerate(level)} for level in levels]
    faces = []
    for n in range(len(levels) - 1):
        faces.append(tuple(
            tuple(index[n][(u[:i] + u[i + 1:], C.face(n + 1, y, i, u[i]))] for u, y in levels[n + 1])
            for i in range(n + 1)
        ))
    names = tuple(tuple(f"({u},{C.name(len(u), y)})" for u, y in level) for level in levels)
    return PresimplicialSet(tuple(len(l) for l in levels), tuple(faces), names)


def link(C: PrecubicalSet, x: int) -> PresimplicialSet:
    """Link of vertex ``x``: pairs ``(u, y)`` with ``∂^u(y) = x``.

    Level 0 holds only ``("", x)``; level ``n`` simplices are ``n``-cubes
    seen from one of their corners equal to ``x``.
    """
    return _link(C, x)


def link_global(C: PrecubicalSet) -> PresimplicialSet:
    """All pairs ``(u, y)`` for every cube ``y`` and sign word ``u``."""
    return _link(C, None)


class FlagResult(NamedTuple):
    ok: bool
    witness: dict | None


def is_flag(S: PresimplicialSet) -> FlagResult:
    """Every ``∂Zn → S`` (``n >= 3``) extends to exactly one ``Zn → S``.

    ``n`` stops at ``top + 2``: beyond that ``∂Zn`` has simplices at levels
    absent from ``S`` and admits no morphism at all.
    """
    for n in range(3, S.top + 3):
        H = simplex(n, hollow=True)
        Z = simplex(n)
        top_faces = [Z.face(n, 0, i) for i in range(n)]
        fill_index: dict[tuple[int, ...], int] = {}
        if S.count(n):
            for y in range(S.count(n)):
                key = tuple(S.face(n, y, i) for i in range(n))
                fill_index[key] = fill_index.get(key, 0) + 1
        for maps in search_presheaf(H.counts, H.slots(), S.counts, S.slots()):
            key = tuple(maps[n - 1][f] for f in top_faces)
            count = fill_index.get(key, 0)
            if count != 1:
                return FlagResult(False, {
                    "n": n,
                    "boundary": [S.name(n - 1, s) for s in key],
                    "fillers": count,
                })
    return FlagResult(True, None)


# ---------------------------------------------------------------------------
# geometricity


@dataclass
class GeometricityReport:
    no_looping_edge: bool = True
    no_folded_square: bool = True
    no_parallel_edges: bool = True
    no_pinned_squares: bool = True
    at_most_one_square_closing: bool = True
    witnesses: dict = field(default_factory=dict)

    @property
    def geometric(self) -> bool:
        return (
            self.no_looping_edge and self.no_folded_square and self.no_parallel_edges
            and self.no_pinned_squares and self.at_most_one_square_closing
        )


def geometricity_report(C: PrecubicalSet) -> GeometricityReport:
    """The five conditions characterizing geometric 2-dimensional complexes.

    Higher cells are ignored (the 2-truncation is checked).
    """
    C = truncate(C, 2)
    rep = GeometricityReport()
    for e in range(C.count(1)):
        if C.src(e) == C.tgt(e):
            rep.no_looping_edge = False
            rep.witnesses["looping_edge"] = C.name(1, e)
            break
    corners = []
    for a in range(C.count(2)):
        corners.append({u: iterated_face(C, a, u) for u in ("--", "-+", "+-", "++")})
    for a, cor in enumerate(corners):
        if cor["--"] == cor["++"] or cor["-+"] == cor["+-"]:
            rep.no_folded_square = False
            rep.witnesses["folded_square"] = C.name(2, a)
            break
    seen: dict[tuple[int, int], int] = {}
    for e in range(C.count(1)):
        key = (C.src(e), C.tgt(e))
        if key in seen:
            rep.no_parallel_edges = False
            rep.witnesses["parallel_edges"] = [C.name(1, seen[key]), C.name(1, e)]
            break
        seen[key] = e
    for pair in (("--", "++"), ("+-", "-+")):
        if not rep.no_pinned_squares:
            break
        seen = {}
        for a, cor in enumerate(corners):
            key = (cor[pair[0]], cor[pair[1]])
            if key in seen:
                rep.no_pinned_squares = False
                rep.witnesses["pinned_squares"] = [C.name(2, seen[key]), C.name(2, a)]
                break
            seen[key] = a
    for u in SQUARE_TEMPLATES:
        incl = lambda_in_cube(u)
        found = None
        for h in iter_morphisms(incl.source, C):
            st = lift_status(C, incl, h)
            if st.count >= 2:
                found = {"template": u, "squares": [C.name(2, g.maps[2][0]) for g in st.witnesses]}
                break
        if found:
            rep.at_most_one_square_closing = False
            rep.witnesses["square_closing_not_unique"] = found
            break
    return rep


class ElementsResult(NamedTuple):
    ok: bool
    witness: dict | None


def check_geometric_via_elements(C: PrecubicalSet) -> ElementsResult:
    """Geometricity read off the category of elements.

    It must be a poset (distinct face words never reach the same cell) and
    any two cells with a common iterated face must have a greatest one.
    """
    gid_offset = [0]
    for n in range(len(C.cells)):
        gid_offset.append(gid_offset[-1] + C.count(n))
    down: list[frozenset[int]] = []
    for n in range(len(C.cells)):
        words = ["".join(w) for w in itertools.product("-0+", repeat=n)]
        for y in range(C.count(n)):
            seen: dict[tuple[int, int], str] = {}
            for u in words:
                k = u.count("0")
                f = (k, iterated_face(C, y, u))
                if f in seen:
                    return ElementsResult(False, {
                        "reason": "self-intersection",
                        "cell": C.name(n, y),
                        "words": [seen[f], u],
                    })
                seen[f] = u
            down.append(frozenset(gid_offset[k] + c for k, c in seen))
    cell_of = [(n, c) for n in range(len(C.cells)) for c in range(C.count(n))]
    dims = [n for n, _ in cell_of]
    star: dict[int, list[int]] = {}
    for g, d in enumerate(down):
        for v in d:
            if v < gid_offset[1]:
                star.setdefault(v, []).append(g)
    checked = set()
    for v in sorted(star):
        for p, q in itertools.combinations(star[v], 2):
            if (p, q) in checked:
                continue
            checked.add((p, q))
            common = down[p] & down[q]
            top = max(dims[g] for g in common)
            if not any(common <= down[m] for m in common if dims[m] == top):
                return ElementsResult(False, {
                    "reason": "no greatest common face",
                    "cells": [C.name(*cell_of[p]), C.name(*cell_of[q])],
                })
    return ElementsResult(True, None)


# ---------------------------------------------------------------------------
# lifting properties


class CubePropertyResult(NamedTuple):
    ok: bool
    witness: dict | None
    liftings_unique: bool


def check_cube_property(C: PrecubicalSet) -> CubePropertyResult:
    """Every ``Λ^u → C`` (``|u| = 3``) extends along ``Λ^u ↪ ∂Y3``."""
    unique = True
    for u in CUBE_TEMPLATES:
        incl = lambda_in_hollow(u)
        for h in iter_morphisms(incl.source, C):
            st = lift_status(C, incl, h)
            if st.count == 0:
                return CubePropertyResult(False, {
                    "template": u,
                    "squares": [C.name(2, s) for s in h.maps[2]],
                }, unique)
            if st.count > 1:
                unique = False
    return CubePropertyResult(True, None, unique)


class FillingResult(NamedTuple):
    ok: bool
    witness: dict | None


def unique_filling(C: PrecubicalSet, k: int) -> FillingResult:
    """Each hollow ``k``-cube in ``C`` has exactly one filler (at most one for ``k = 2``)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    H = hollow_cube(k, bound=max(k, 6))
    top = [H.lookup(k - 1, "0" * i + s + "0" * (k - 1 - i)) for i in range(k) for s in SIGNS]
    index = C.fillers[k] if k < len(C.cells) else {}
    for h in iter_morphisms(H, C):
        key = tuple(h.maps[k - 1][f] for f in top)
        count = len(index.get(key, ()))
        if count > 1 or (count == 0 and k >= 3):
            return FillingResult(False, {
                "k": k,
                "boundary": [C.name(k - 1, f) for f in key],
                "fillers": count,
            })
    return FillingResult(True, None)


def lambda_lifting(C: PrecubicalSet, n: int) -> FillingResult:
    """Every ``Λ^u → C`` with ``|u| = n`` lifts uniquely along ``Λ^u ↪ Yn``."""
    for u in _signs(n):
        incl = lambda_in_cube(u)
        for h in iter_morphisms(incl.source, C):
            st = lift_status(C, incl, h)
            if st.count != 1:
                return FillingResult(False, {"template": u, "lifts": st.count})
    return FillingResult(True, None)


# ---------------------------------------------------------------------------
# verdict


@dataclass
class NpcVerdict:
    geometric: bool
    cube_property: bool
    unique_fillings: dict[int, bool]
    flag_links: bool
    theorem_check: str
    witnesses: list[dict] = field(default_factory=list)

    @property
    def npc(self) -> bool:
        return self.geometric and self.cube_property and all(self.unique_fillings.values())

    def to_json(self) -> dict:
        return {
            "npc": self.npc,
            "geometric": self.geometric,
            "cube_property": self.cube_property,
            "unique_fillings": {str(k): v for k, v in sorted(self.unique_fillings.items())},
            "flag_links": self.flag_links,
            "theorem_check": self.theorem_check,
            "witnesses": self.witnesses,
        }


def npc_verdict(C: PrecubicalSet) -> NpcVerdict:
    """Decide NPC by the axioms and, independently, by flagness of vertex links.

    ``theorem_check`` is ``"agree"`` or ``"disagree"`` for geometric input,
    and ``"not applicable"`` otherwise.
    """
    witnesses: list[dict] = []
    geo = check_geometric_via_elements(C)
    if not geo.ok:
        witnesses.append({"check": "geometric", **geo.witness})
    cube = check_cube_property(C)
    if not cube.ok:
        witnesses.append({"check": "cube_property", **cube.witness})
    fillings = {}
    for k in range(3, C.dim + 2):
        res = unique_filling(C, k)
        fillings[k] = res.ok
        if not res.ok:
            witnesses.append({"check": "unique_filling", **res.witness})
    flag = True
    for x in range(C.count(0)):
        res = is_flag(link(C, x))
        if not res.ok:
            flag = False
            witnesses.append({"check": "flag_link", "vertex": C.name(0, x), **res.witness})
            break
    axioms = cube.ok and all(fillings.values())
    if not geo.ok:
        check = "not applicable"
    else:
        check = "agree" if axioms == flag else "disagree"
    return NpcVerdict(geo.ok, cube.ok, fillings, flag, check, witnesses)
