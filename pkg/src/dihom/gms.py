"""Finite generalized metric spaces and grid realizations of precubical sets.

Distances are ``float`` matrices where ``inf`` means unreachable; they may be
asymmetric.  Colimits are computed as shortest chains with a (min, +)
closure.  A precubical set is realized by sampling each cube on a grid of
side ``1/k`` and identifying nodes that lie on shared faces.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .npc import check_geometric_via_elements
from .pcs_core import PrecubicalSet, dumps, iterated_face

__all__ = [
    "FinitePointSpace", "SpaceViolation", "validate_space", "closure", "chain_distance",
    "quotient_classes", "symmetrize_left", "symmetrize_right", "line", "product",
    "NotGeometric", "RealizationGrid", "realize_grid", "LocalDistanceReport",
    "escape_distance", "check_local_distance", "Cat0Result", "cat0_triangle_check",
    "to_csv", "space_to_json", "space_from_json", "grid_to_json",
]

INF = math.inf


@dataclass(frozen=True, eq=False)
class FinitePointSpace:
    labels: tuple
    dist: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.shape != (len(self.labels), len(self.labels)):
            raise ValueError("distance matrix does not match the points")
        if np.isnan(d).any() or (d < 0).any():
            raise ValueError("distances must be non-negative (inf allowed)")
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def d(self, x, y) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.dist, self.dist.T))


class SpaceViolation(NamedTuple):
    kind: str  # "diagonal" or "triangle"
    x: int
    y: int
    z: int
    excess: float


def validate_space(X: FinitePointSpace, tol: float = 1e-9) -> list[SpaceViolation]:
    """Points at non-zero distance from themselves and violated triangles ``d(x,z) > d(x,y)+d(y,z)``."""
    d = X.dist
    out = [SpaceViolation("diagonal", i, i, i, float(d[i, i])) for i in range(len(X)) if d[i, i] != 0]
    with np.errstate(invalid="ignore"):
        for y in range(len(X)):
            via = d[:, y, None] + d[None, y, :]
            bad = np.argwhere(d > via + tol)
            out.extend(SpaceViolation("triangle", int(x), y, int(z), float(d[x, z] - via[x, z])) for x, z in bad)
    out.sort(key=lambda v: (v.kind, v.x, v.y, v.z))
    return out


def closure(d: np.ndarray) -> np.ndarray:
    """All-pairs shortest chains over (min, +); ``inf`` absorbs."""
    d = np.array(d, dtype=float)
    np.fill_diagonal(d, np.minimum(np.diag(d), 0.0))
    for k in range(len(d)):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def quotient_classes(n: int, glue) -> list[int]:
    """For each point, the least point identified with it."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in glue:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    return [find(x) for x in range(n)]


def chain_distance(Y: FinitePointSpace, glue: Sequence[tuple[int, int]] = ()) -> FinitePointSpace:
    """Quotient of ``Y`` by the equivalence generated by ``glue``.

    The distance is the infimum over chains that jump freely between
    identified points.  Each class is labelled by its least member.
    """
    d = Y.dist.copy()
    for x, y in glue:
        d[x, y] = d[y, x] = 0.0
    d = closure(d)
    cls = quotient_classes(len(Y), glue)
    reps = sorted(set(cls))
    return FinitePointSpace(tuple(Y.labels[r] for r in reps), d[np.ix_(reps, reps)])


def symmetrize_left(X: FinitePointSpace) -> FinitePointSpace:
    """Largest symmetric distance below ``d``: shortest chains whose steps go either way."""
    return FinitePointSpace(X.labels, closure(np.minimum(X.dist, X.dist.T)))


def symmetrize_right(X: FinitePointSpace) -> FinitePointSpace:
    """``max(d(x,y), d(y,x))``."""
    return FinitePointSpace(X.labels, np.maximum(X.dist, X.dist.T))


def line(values: Sequence[float], directed: bool = False) -> FinitePointSpace:
    """Points of the real line; directed means only increasing moves are finite."""
    v = np.asarray(values, dtype=float)
    diff = v[None, :] - v[:, None]
    d = np.abs(diff)
    if directed:
        d = np.where(diff >= 0, diff, INF)
    return FinitePointSpace(tuple(values), d)


def product(X: FinitePointSpace, Y: FinitePointSpace) -> FinitePointSpace:
    """Cartesian product with the max of the coordinate distances."""
    labels = tuple((a, b) for a in X.labels for b in Y.labels)
    d = np.maximum(X.dist[:, None, :, None], Y.dist[None, :, None, :])
    n = len(labels)
    return FinitePointSpace(labels, d.reshape(n, n))


# ---------------------------------------------------------------------------
# grid realization


class NotGeometric(ValueError):
    pass


def _local_metric(P: np.ndarray, metric: str, directed: bool) -> np.ndarray:
    diff = P[None, :, :] - P[:, None, :]
    if metric == "linf":
        d = np.abs(diff).max(axis=2) if P.shape[1] else np.zeros((len(P), len(P)))
    elif metric == "l2":
        d = np.sqrt((diff ** 2).sum(axis=2))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    if directed:
        d = np.where((diff >= 0).all(axis=2), d, INF)
    return d


@dataclass(eq=False)
class RealizationGrid:
    source: PrecubicalSet
    k: int
    metric: str
    directed: bool
    space: FinitePointSpace
    nodes: list[tuple[int, int, tuple[int, ...]]]
    index: dict[tuple[int, int, tuple[int, ...]], int]
    arcs: np.ndarray
    containing: list[list[tuple[int, int, tuple[int, ...]]]] = field(default_factory=list)
    maximal: list[tuple[int, int]] = field(default_factory=list)
    cube_nodes: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def node(self, n: int, c: int, coords: Sequence[int]) -> int:
        """Node at integer grid coordinates ``coords`` (in ``0..k``) of the ``n``-cube ``c``."""
        if len(coords) != n or any(not 0 <= x <= self.k for x in coords):
            raise ValueError(f"bad grid coordinates {coords} for a {n}-cube")
        u = "".join("-" if x == 0 else "+" if x == self.k else "0" for x in coords)
        face = iterated_face(self.source, c, u) if n else c
        inner = tuple(x for x in coords if 0 < x < self.k)
        return self.index[(len(inner), face, inner)]

    def vertex(self, x: int) -> int:
        return self.index[(0, x, ())]

    def distance(self, a: int, b: int) -> float:
        return float(self.space.dist[a, b])

    def label(self, i: int) -> str:
        n, c, coords = self.nodes[i]
        name = self.source.name(n, c)
        return f"{name}@{','.join(str(x) for x in coords)}" if coords else name


def realize_grid(C: PrecubicalSet, k: int, per_cube_metric: str = "linf", directed: bool = False) -> RealizationGrid:
    """Sample every cube of ``C`` on a grid of step ``1/k`` and glue along faces."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if per_cube_metric not in ("linf", "l2"):
        raise ValueError(f"unknown metric {per_cube_metric!r}")
    geo = check_geometric_via_elements(C)
    if not geo.ok:
        raise NotGeometric(f"realization needs a geometric complex: {geo.witness}")
    nodes: list[tuple[int, int, tuple[int, ...]]] = []
    index: dict = {}
    for n in range(C.dim + 1):
        for c in range(C.count(n)):
            for coords in itertools.product(range(1, k), repeat=n):
                index[(n, c, coords)] = len(nodes)
                nodes.append((n, c, coords))
    N = len(nodes)
    containing: list[list] = [[] for _ in range(N)]
    cube_nodes: dict[tuple[int, int], np.ndarray] = {}
    is_face = [set() for _ in range(C.dim + 1)]
    for n in range(1, C.dim + 1):
        for c in range(C.count(n)):
            for i in range(n):
                for s in "-+":
                    is_face[n - 1].add(C.face(n, c, i, s))
    maximal = [(n, c) for n in range(C.dim + 1) for c in range(C.count(n)) if c not in is_face[n]]
    arcs = np.full((N, N), INF)
    np.fill_diagonal(arcs, 0.0)
    for n in range(C.dim + 1):
        for c in range(C.count(n)):
            ids = []
            pts = list(itertools.product(range(k + 1), repeat=n))
            for coords in pts:
                u = "".join("-" if x == 0 else "+" if x == k else "0" for x in coords)
                face = iterated_face(C, c, u) if n else c
                inner = tuple(x for x in coords if 0 < x < k)
                nid = index[(len(inner), face, inner)]
                ids.append(nid)
                containing[nid].append((n, c, coords))
            ids_arr = np.array(ids, dtype=int)
            cube_nodes[(n, c)] = ids_arr
            if c in is_face[n]:
                continue
            P = np.array(pts, dtype=float).reshape(len(pts), n) / k
            sub = np.ix_(ids_arr, ids_arr)
            arcs[sub] = np.minimum(arcs[sub], _local_metric(P, per_cube_metric, directed))
    labels = []
    for n, c, coords in nodes:
        name = C.name(n, c)
        labels.append(f"{name}@{','.join(str(x) for x in coords)}" if coords else name)
    space = FinitePointSpace(tuple(labels), closure(arcs))
    return RealizationGrid(C, k, per_cube_metric, directed, space, nodes, index, arcs,
                           containing, maximal, cube_nodes)


# ---------------------------------------------------------------------------
# local distance


def escape_distance(rg: RealizationGrid, x: int) -> float:
    """Least distance from ``x`` to a face, not containing ``x``, of a cube containing ``x``."""
    eps = INF
    for n, _c, coords in rg.containing[x]:
        for t in coords:
            t = t / rg.k
            if t > 0:
                eps = min(eps, t)
            if t < 1:
                eps = min(eps, 1 - t)
    return eps


@dataclass
class LocalDistanceReport:
    x: int
    epsilon: float
    checked: int
    violations: list[tuple[int, float, float]]
    max_error: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_local_distance(rg: RealizationGrid, x: int, tol: float = 1e-9) -> LocalDistanceReport:
    """Every node closer to ``x`` than the escape distance lies in a common cube at in-cube distance."""
    if rg.directed:
        raise ValueError("the escape distance is defined for the undirected realization")
    eps = escape_distance(rg, x)
    cubes_x = {(n, c): coords for n, c, coords in rg.containing[x]}
    violations = []
    checked = 0
    max_err = 0.0
    for y in range(len(rg.nodes)):
        dxy = rg.space.dist[x, y]
        if y == x or not dxy < eps - tol:
            continue
        checked += 1
        best = INF
        ok = True
        for n, c, coords in rg.containing[y]:
            if (n, c) not in cubes_x:
                ok = False
                continue
            P = np.array([cubes_x[(n, c)], coords], dtype=float).reshape(2, n) / rg.k
            best = min(best, float(_local_metric(P, rg.metric, False)[0, 1]))
        err = abs(best - dxy) if math.isfinite(best) else INF
        max_err = max(max_err, err)
        if not ok or err > tol:
            violations.append((y, float(dxy), best))
    return LocalDistanceReport(x, eps, checked, violations, max_err)


# ---------------------------------------------------------------------------
# CAT(0) comparison triangles


class Cat0Result(NamedTuple):
    ok: bool
    pairs: int
    max_gap: float
    witness: tuple | None  # (p, q, gap), points as (side, arclength)


def _geodesic(rg: RealizationGrid, D: np.ndarray, u: int, v: int, tol: float = 1e-9) -> list[int]:
    """A shortest grid polyline from ``u`` to ``v``, taking the longest valid hop each time."""
    path = [u]
    while path[-1] != v:
        cur = path[-1]
        total = D[cur, v]
        ok = np.abs(rg.arcs[cur] + D[:, v] - total) <= tol * max(1.0, total)
        ok[cur] = False
        cand = np.flatnonzero(ok & np.isfinite(rg.arcs[cur]))
        if len(cand) == 0:
            raise RuntimeError("no geodesic continuation")
        nxt = int(cand[np.argmax(rg.arcs[cur, cand])])
        path.append(nxt)
    return path


def _common_cubes(rg: RealizationGrid, a: int, b: int) -> list[tuple[int, int, tuple, tuple]]:
    """Every cube holding both nodes, with their coordinates in it."""
    ca = {(n, c): coords for n, c, coords in rg.containing[a]}
    out = [(n, c, ca[(n, c)], coords) for n, c, coords in rg.containing[b] if (n, c) in ca]
    if not out:
        raise RuntimeError("consecutive geodesic nodes share no cube")
    return out


# a point on a side, given in every cube that contains it: (n, c) -> coordinates in [0,1]^n
_SidePoint = dict


def _point_at(rg: RealizationGrid, poly: list[int], s: float) -> _SidePoint:
    for a, b in zip(poly, poly[1:]):
        seg = rg.arcs[a, b]
        if s <= seg or b == poly[-1]:
            t = 0.0 if seg == 0 else min(1.0, s / seg)
            out = {}
            for n, c, ca, cb in _common_cubes(rg, a, b):
                pa, pb = np.array(ca, float) / rg.k, np.array(cb, float) / rg.k
                out[(n, c)] = pa + t * (pb - pa)
            return out
        s -= seg
    return {(n, c): np.array(coords, float) / rg.k for n, c, coords in rg.containing[poly[-1]]}


def _in_cube(metric: str, u: np.ndarray, v: np.ndarray) -> float:
    diff = u - v
    return float(np.sqrt((diff ** 2).sum())) if metric == "l2" else float(np.abs(diff).max(initial=0.0))


def _point_distance(rg: RealizationGrid, D: np.ndarray, p: _SidePoint, q: _SidePoint) -> float:
    """Through grid nodes of cubes holding ``p`` and ``q``, or straight when they share a cube."""
    def local(pt):
        ids, ds = [], []
        for (n, c), x in pt.items():
            P = np.array(list(itertools.product(range(rg.k + 1), repeat=n)), float).reshape(-1, n) / rg.k
            ids.append(rg.cube_nodes[(n, c)])
            ds.append(np.array([_in_cube(rg.metric, y, x) for y in P]))
        return np.concatenate(ids), np.concatenate(ds)

    ip, dp = local(p)
    iq, dq = local(q)
    best = float((dp[:, None] + D[np.ix_(ip, iq)] + dq[None, :]).min())
    for cube in p.keys() & q.keys():
        best = min(best, _in_cube(rg.metric, p[cube], q[cube]))
    return best


def cat0_triangle_check(rg: RealizationGrid, x: int, y: int, z: int, sample_count: int = 200,
                        tol: float = 0.05, seed: int = 0) -> Cat0Result:
    """Compare sampled chords of the grid-geodesic triangle ``xyz`` with its planar comparison triangle.

    ``p`` and ``q`` are drawn (deterministically from ``seed``) on two distinct
    sides, by arclength.  The check fails when some ``d(p,q)`` exceeds the
    comparison distance by more than ``tol``.
    """
    X = rg.space if rg.space.symmetric else symmetrize_left(rg.space)
    D = X.dist
    corners = (x, y, z)
    sides = [(x, y), (y, z), (z, x)]
    lengths = [float(D[a, b]) for a, b in sides]
    if not all(math.isfinite(v) for v in lengths):
        raise ValueError("triangle vertices must be at finite distance")
    if min(lengths) == 0 or len(set(corners)) < 3:
        return Cat0Result(True, 0, 0.0, None)
    dxy, dyz, dzx = lengths
    cx = (dzx ** 2 + dxy ** 2 - dyz ** 2) / (2 * dxy)
    cy = math.sqrt(max(0.0, dzx ** 2 - cx ** 2))
    bar = [np.array([0.0, 0.0]), np.array([dxy, 0.0]), np.array([cx, cy])]
    polys = [_geodesic(rg, D, a, b) for a, b in sides]
    rng = random.Random(seed)
    worst = (-INF, None)
    for _ in range(sample_count):
        i, j = rng.sample(range(3), 2)
        si, sj = rng.uniform(0, lengths[i]), rng.uniform(0, lengths[j])
        p, q = _point_at(rg, polys[i], si), _point_at(rg, polys[j], sj)
        d = _point_distance(rg, D, p, q)
        pb = bar[i] + (bar[(i + 1) % 3] - bar[i]) * (si / lengths[i])
        qb = bar[j] + (bar[(j + 1) % 3] - bar[j]) * (sj / lengths[j])
        gap = d - float(np.linalg.norm(pb - qb))
        if gap > worst[0]:
            worst = (gap, ((i, si), (j, sj), gap))
    ok = worst[0] <= tol
    return Cat0Result(ok, sample_count, worst[0], None if ok else worst[1])


# ---------------------------------------------------------------------------
# export


def to_csv(X: FinitePointSpace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + [str(l) for l in X.labels])
    for l, row in zip(X.labels, X.dist):
        w.writerow([str(l)] + [repr(float(v)) if math.isfinite(v) else "inf" for v in row])
    return buf.getvalue()


def space_to_json(X: FinitePointSpace) -> dict:
    return {
        "points": [list(l) if isinstance(l, tuple) else l for l in X.labels],
        "dist": [[float(v) if math.isfinite(v) else None for v in row] for row in X.dist],
    }


def space_from_json(data: dict) -> FinitePointSpace:
    labels = tuple(tuple(l) if isinstance(l, list) else l for l in data["points"])
    d = np.array([[INF if v is None else float(v) for v in row] for row in data["dist"]], dtype=float)
    return FinitePointSpace(labels, d.reshape(len(labels), len(labels)))


def grid_to_json(rg: RealizationGrid) -> dict:
    out = space_to_json(rg.space)
    out.update({
        "source_sha256": hashlib.sha256(dumps(rg.source).encode()).hexdigest(),
        "k": rg.k,
        "metric": rg.metric,
        "directed": rg.directed,
        "nodes": [[n, rg.source.name(n, c), list(coords)] for n, c, coords in rg.nodes],
    })
    return out
