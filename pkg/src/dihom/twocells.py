"""Formal 2-cells between paths and their rewriting into canonical forms.

A formal 2-cell is a vertical composite of slices, each one generator
(``Gamma`` tile swap, ``Eta`` insertion of ``a·ā``, ``Eps`` cancellation of
``ā·a``) in a context of identities.  :func:`rewrite_to_canonical` inserts the
slices one at a time, bottom first, into a canonical term built from the
operators ``Z``, ``I``, ``G``, ``H`` and ``E``.  Every step is one of the
groupoid relations (or the interchange law), and its name is recorded in the
trace.  Between dipaths the result only uses ``G``, ``I`` and ``Z``, which
expands to a sequence of tile moves.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

from .npc import check_cube_property, geometricity_report
from .paths import Move, PathT, check_path, dihomotopy_neighbors, path_end, path_from_json, path_to_json
from .pcs_core import PrecubicalSet, Step, tiles

__all__ = [
    "Gamma", "Eta", "Eps", "Slice", "FormalTwoCell", "InvalidCell", "NotDefined",
    "HypothesisViolated", "NonDirectedEndpoint", "CanonicalForm", "Z", "I", "G", "H", "E",
    "tile_set", "validate_cell", "identity_cell", "cell_from_generators", "cell_from_moves",
    "compose", "whisker", "gamma_general", "check_hypotheses", "rewrite_to_canonical",
    "rewrite_with_trace", "normalize_canonical", "expand", "extract_dihomotopy",
    "cell_length", "source", "target", "to_sexpr", "parse_sexpr", "cell_to_json",
    "cell_from_json",
]


class InvalidCell(ValueError):
    pass


class NotDefined(ValueError):
    """A generalized gamma needs a tile the complex does not have."""

    def __init__(self, msg: str, missing: tuple[Step, Step]):
        super().__init__(msg)
        self.missing = missing


class HypothesisViolated(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


class NonDirectedEndpoint(ValueError):
    pass


# ---------------------------------------------------------------------------
# generators, slices, cells


class Gamma(NamedTuple):
    """``a·b ⇒ b2·a2`` for a tile ``a·b ⋄ b2·a2``."""

    a: Step
    b: Step
    b2: Step
    a2: Step

    @property
    def src(self) -> tuple[Step, ...]:
        return (self.a, self.b)

    @property
    def tgt(self) -> tuple[Step, ...]:
        return (self.b2, self.a2)


class Eta(NamedTuple):
    """``ε ⇒ a·ā``."""

    a: Step

    @property
    def src(self) -> tuple[Step, ...]:
        return ()

    @property
    def tgt(self) -> tuple[Step, ...]:
        return (self.a, self.a.inv())


class Eps(NamedTuple):
    """``ā·a ⇒ ε``."""

    a: Step

    @property
    def src(self) -> tuple[Step, ...]:
        return (self.a.inv(), self.a)

    @property
    def tgt(self) -> tuple[Step, ...]:
        return ()


Generator = Union[Gamma, Eta, Eps]


class Slice(NamedTuple):
    left: PathT
    gen: Generator
    right: PathT

    @property
    def position(self) -> int:
        return len(self.left)


@dataclass(frozen=True)
class FormalTwoCell:
    source: PathT
    target: PathT
    slices: tuple[Slice, ...] = ()

    def __len__(self) -> int:
        return len(self.slices)

    def generators(self) -> list[tuple[int, Generator]]:
        return [(s.position, s.gen) for s in self.slices]


def tile_set(C: PrecubicalSet) -> frozenset[tuple[Step, Step, Step, Step]]:
    """All oriented tiles, including those whose two sides coincide."""
    cached = C.__dict__.get("_tile_set")
    if cached is None:
        cached = frozenset(q for t in tiles(C) for q in t.oriented())
        C.__dict__["_tile_set"] = cached
    return cached


def _partners(C: PrecubicalSet) -> dict[tuple[Step, Step], list[tuple[Step, Step]]]:
    cached = C.__dict__.get("_tile_partners")
    if cached is None:
        cached = {}
        for a, b, b2, a2 in sorted(tile_set(C)):
            cached.setdefault((a, b), []).append((b2, a2))
        C.__dict__["_tile_partners"] = cached
    return cached


def _gen_problems(C: PrecubicalSet, gen) -> list[str]:
    steps = gen.src + gen.tgt if isinstance(gen, Gamma) else (gen.a,)
    for s in steps:
        if not isinstance(s, Step) or not 0 <= s.edge < C.count(1):
            return [f"{gen}: no edge {s}"]
    if isinstance(gen, Gamma):
        if tuple(gen) not in tile_set(C):
            return [f"{gen}: no such tile"]
        return []
    if isinstance(gen, (Eta, Eps)):
        return []
    return [f"unknown generator {gen!r}"]


def _apply(C, steps: tuple[Step, ...], pos: int, gen) -> tuple[Step, ...]:
    src = gen.src
    if steps[pos:pos + len(src)] != src or pos > len(steps):
        raise InvalidCell(f"{gen} does not match the path at position {pos}")
    return steps[:pos] + gen.tgt + steps[pos + len(src):]


def validate_cell(C: PrecubicalSet, phi: FormalTwoCell) -> list[str]:
    """Every typing problem of ``phi``; empty when it is a formal 2-cell of ``C``."""
    problems: list[str] = []
    for p, what in ((phi.source, "source"), (phi.target, "target")):
        try:
            check_path(C, p)
        except ValueError as exc:
            problems.append(f"{what}: {exc}")
    if problems:
        return problems
    if phi.source.start != phi.target.start or path_end(C, phi.source) != path_end(C, phi.target):
        problems.append("source and target do not have the same endpoints")
    cur = phi.source.steps
    for n, sl in enumerate(phi.slices):
        bad = _gen_problems(C, sl.gen)
        if bad:
            problems.extend(f"slice {n}: {b}" for b in bad)
            return problems
        whole = sl.left.steps + sl.gen.src + sl.right.steps
        if sl.left.start != phi.source.start:
            problems.append(f"slice {n}: starts at the wrong vertex")
        if whole != cur:
            problems.append(f"slice {n}: source does not match the previous target")
            return problems
        try:
            check_path(C, PathT(sl.left.start, sl.left.steps + sl.gen.tgt + sl.right.steps))
            check_path(C, PathT(sl.left.start, whole))
        except ValueError as exc:
            problems.append(f"slice {n}: {exc}")
            return problems
        cur = sl.left.steps + sl.gen.tgt + sl.right.steps
    if cur != phi.target.steps:
        problems.append("the last slice does not end at the target")
    return problems


def cell_from_generators(C: PrecubicalSet, src: PathT, gens: Iterable[tuple[int, Generator]]) -> FormalTwoCell:
    """Stack generators at the given positions on top of ``src``."""
    check_path(C, src)
    cur = src.steps
    slices = []
    for pos, gen in gens:
        bad = _gen_problems(C, gen)
        if bad:
            raise InvalidCell(bad[0])
        if isinstance(gen, Eta):
            v = path_end(C, PathT(src.start, cur[:pos]))
            if C.step_src(gen.a) != v:
                raise InvalidCell(f"{gen} does not start at the vertex at position {pos}")
        new = _apply(C, cur, pos, gen)
        right_start = path_end(C, PathT(src.start, cur[:pos] + gen.src))
        slices.append(Slice(PathT(src.start, cur[:pos]), gen, PathT(right_start, cur[pos + len(gen.src):])))
        cur = new
    return FormalTwoCell(src, PathT(src.start, cur), tuple(slices))


def identity_cell(s: PathT) -> FormalTwoCell:
    return FormalTwoCell(s, s, ())


def cell_from_moves(C: PrecubicalSet, src: PathT, moves: Iterable[Move]) -> FormalTwoCell:
    """The formal 2-cell performing a sequence of homotopy moves."""
    gens = []
    cur = src.steps
    for m in moves:
        if m.rule == "tile":
            x, y = cur[m.position:m.position + 2]
            gen = Gamma(x, y, *m.steps)
        elif m.rule == "insert":
            gen = Eta(m.steps[0])
        elif m.rule == "delete":
            gen = Eps(m.steps[1])
        else:
            raise InvalidCell(f"unknown rule {m.rule!r}")
        gens.append((m.position, gen))
        cur = _apply(C, cur, m.position, gen)
    return cell_from_generators(C, src, gens)


def compose(phi: FormalTwoCell, psi: FormalTwoCell) -> FormalTwoCell:
    """``phi`` followed by ``psi``."""
    if phi.target != psi.source:
        raise InvalidCell("cells are not composable")
    return FormalTwoCell(phi.source, psi.target, phi.slices + psi.slices)


def whisker(C: PrecubicalSet, left: PathT, phi: FormalTwoCell, right: PathT) -> FormalTwoCell:
    """``id_left · phi · id_right``."""
    src = PathT(left.start, left.steps + phi.source.steps + right.steps)
    return cell_from_generators(C, src, [(p + len(left), g) for p, g in phi.generators()])


def cell_length(phi: FormalTwoCell) -> int:
    return len(phi.slices)


def gamma_general(C: PrecubicalSet, a: Step, f: PathT) -> FormalTwoCell:
    """The composite ``a·f ⇒ f'·a'`` moving ``a`` across ``f`` one tile at a time.

    When several tiles close a pair the least one is taken.
    """
    if C.step_tgt(a) != f.start:
        raise InvalidCell("a does not end where f starts")
    check_path(C, f)
    part = _partners(C)
    cur = a
    gens = []
    for j, b in enumerate(f.steps):
        opts = [q for q in part.get((cur, b), ()) if (cur, b) != q] or part.get((cur, b), [])
        if not opts:
            raise NotDefined(f"no tile closes {cur}·{b}", (cur, b))
        b2, a2 = opts[0]
        gens.append((j, Gamma(cur, b, b2, a2)))
        cur = a2
    return cell_from_generators(C, PathT(C.step_src(a), (a,) + f.steps), gens)


# ---------------------------------------------------------------------------
# canonical forms


class CanonicalForm:
    """Base of the operator terms ``Z``, ``I``, ``G``, ``H`` and ``E``."""

    __slots__ = ()


@dataclass(frozen=True)
class Z(CanonicalForm):
    x: int


@dataclass(frozen=True)
class I(CanonicalForm):
    a: Step
    psi: CanonicalForm


@dataclass(frozen=True)
class G(CanonicalForm):
    """Strand ``a`` crosses ``f`` (one tile each) on top of ``psi: h ⇒ f·g``."""

    a: Step
    f: tuple[Step, ...]
    g: tuple[Step, ...]
    cross: tuple[Gamma, ...]
    psi: CanonicalForm

    @property
    def f_out(self) -> tuple[Step, ...]:
        return tuple(x.b2 for x in self.cross)

    @property
    def a_out(self) -> Step:
        return self.cross[-1].a2


@dataclass(frozen=True)
class H(CanonicalForm):
    """``η_a`` inserted after ``f``; its ``ā`` crosses ``g``, on top of ``psi: i ⇒ f·g·h``."""

    f: tuple[Step, ...]
    a: Step
    g: tuple[Step, ...]
    h: tuple[Step, ...]
    cross: tuple[Gamma, ...]
    psi: CanonicalForm

    @property
    def g_out(self) -> tuple[Step, ...]:
        return tuple(x.b2 for x in self.cross)

    @property
    def a_out(self) -> Step:
        """The unreversed step whose reversal ends the crossing strand."""
        return (self.cross[-1].a2 if self.cross else self.a.inv()).inv()


@dataclass(frozen=True)
class E(CanonicalForm):
    """``ε_a`` on top of ``ā·psi`` where ``psi: g ⇒ a·f``."""

    a: Step
    f: tuple[Step, ...]
    psi: CanonicalForm


def source(t: CanonicalForm) -> tuple[Step, ...]:
    if isinstance(t, Z):
        return ()
    if isinstance(t, (I, G)):
        return (t.a,) + source(t.psi)
    if isinstance(t, H):
        return source(t.psi)
    return (t.a.inv(),) + source(t.psi)


def target(t: CanonicalForm) -> tuple[Step, ...]:
    if isinstance(t, Z):
        return ()
    if isinstance(t, I):
        return (t.a,) + target(t.psi)
    if isinstance(t, G):
        return t.f_out + (t.a_out,) + t.g
    if isinstance(t, H):
        return t.f + (t.a,) + t.g_out + (t.a_out.inv(),) + t.h
    return t.f


def expand(t: CanonicalForm) -> list[tuple[int, Generator]]:
    """Generators of the formal 2-cell denoted by ``t``, bottom first."""
    if isinstance(t, Z):
        return []
    if isinstance(t, I):
        return [(p + 1, g) for p, g in expand(t.psi)]
    if isinstance(t, G):
        return [(p + 1, g) for p, g in expand(t.psi)] + list(enumerate(t.cross))
    if isinstance(t, H):
        q = len(t.f)
        return expand(t.psi) + [(q, Eta(t.a))] + [(q + 1 + j, x) for j, x in enumerate(t.cross)]
    return [(p + 1, g) for p, g in expand(t.psi)] + [(0, Eps(t.a))]


def _operators(t: CanonicalForm) -> str:
    out = []
    while not isinstance(t, Z):
        out.append(type(t).__name__)
        t = t.psi
    return "".join(out) + "Z"


def _mk_g(a: Step, cross: tuple[Gamma, ...], psi: CanonicalForm) -> CanonicalForm:
    if not cross:
        return I(a, psi)
    tg = target(psi)
    f = tuple(x.b for x in cross)
    assert tg[:len(f)] == f, "G crossings do not match the inner target"
    assert cross[0].a == a and all(x.a2 == y.a for x, y in zip(cross, cross[1:])), "broken strand"
    return G(a, f, tg[len(f):], cross, psi)


def _mk_h(q: int, a: Step, cross: tuple[Gamma, ...], psi: CanonicalForm) -> H:
    tg = target(psi)
    r = len(cross)
    g = tuple(x.b for x in cross)
    assert tg[q:q + r] == g, "H crossings do not match the inner target"
    assert not cross or cross[0].a == a.inv(), "broken strand"
    assert all(x.a2 == y.a for x, y in zip(cross, cross[1:])), "broken strand"
    return H(tg[:q], a, g, tg[q + r:], cross, psi)


def _mk_e(a: Step, psi: CanonicalForm) -> E:
    tg = target(psi)
    assert tg[:1] == (a,), "E does not match the inner target"
    return E(a, tg[1:], psi)


class _Rewriter:
    def __init__(self, C: PrecubicalSet):
        self.C = C
        self.tiles = tile_set(C)
        self.partners = _partners(C)
        self.trace: list[str] = []

    def note(self, rule: str) -> None:
        self.trace.append(rule)

    def gamma(self, a, b, b2, a2, why: str) -> Gamma:
        g = Gamma(a, b, b2, a2)
        if g not in self.tiles:
            raise HypothesisViolated(f"{why}: the right-hand side needs a missing tile", g)
        return g

    # -- strand helpers shared by G and H

    def yang_baxter(self, cross, j, sigma):
        """``sigma`` swaps the outputs of crossings ``j`` and ``j+1``; move it below the strand."""
        x, y = cross[j], cross[j + 1]
        b, c, c_top = x.b, y.b, y.a2
        for c3, b3 in self.partners.get((b, c), ()):
            for u, a3 in self.partners.get((x.a, c3), ()):
                if u != sigma.b2:
                    continue
                if Gamma(a3, b3, sigma.a2, c_top) in self.tiles:
                    self.note("yang-baxter")
                    new = (Gamma(x.a, c3, u, a3), Gamma(a3, b3, sigma.a2, c_top))
                    return Gamma(b, c, c3, b3), cross[:j] + new + cross[j + 2:]
        raise HypothesisViolated("cube property: no way to reorder three crossings", (x, y, sigma))

    def eps_nat(self, cross, j):
        """A cancellation of the outputs of crossings ``j`` and ``j+1``; move it below the strand."""
        x, y = cross[j], cross[j + 1]
        if y.b != x.b.inv() or y.a2 != x.a:
            raise HypothesisViolated("a strand crossing a cancelled pair does not come back unchanged", (x, y))
        self.note("eps-nat")
        return Eps(y.b), cross[:j] + cross[j + 2:]

    # -- insertion

    def insert(self, t: CanonicalForm, k: int, gen) -> CanonicalForm:
        tg = target(t)
        if tg[k:k + len(gen.src)] != gen.src or k > len(tg):
            raise InvalidCell(f"{gen} does not apply at position {k}")
        if isinstance(gen, Eta):
            self.note("eta-to-H")
            return H(tg[:k], gen.a, (), tg[k:], (), t)
        if isinstance(t, I):
            return self._ins_i(t, k, gen)
        if isinstance(t, G):
            return self._ins_g(t, k, gen)
        if isinstance(t, H):
            return self._ins_h(t, k, gen)
        if isinstance(t, E):
            self.note("exchange")
            return _mk_e(t.a, self.insert(t.psi, k + 1, gen))
        raise InvalidCell(f"{gen} cannot act on an empty path")

    def _ins_i(self, t: I, k: int, gen) -> CanonicalForm:
        if k >= 1:
            self.note("exchange")
            return I(t.a, self.insert(t.psi, k - 1, gen))
        if isinstance(gen, Gamma):
            self.note("gamma-start")
            return _mk_g(t.a, (gen,), t.psi)
        self.note("eps-start")
        return _mk_e(gen.a, t.psi)

    def _ins_g(self, t: G, k: int, gen) -> CanonicalForm:
        p = len(t.cross)
        if k >= p + 1:
            self.note("exchange")
            return _mk_g(t.a, t.cross, self.insert(t.psi, k - 1, gen))
        if k + 1 <= p - 1:
            if isinstance(gen, Gamma):
                tau, cross = self.yang_baxter(t.cross, k, gen)
            else:
                tau, cross = self.eps_nat(t.cross, k)
            return _mk_g(t.a, cross, self.insert(t.psi, k, tau))
        last = t.cross[-1]
        if k == p - 1:
            if isinstance(gen, Gamma):
                if (gen.b2, gen.a2) != (last.a, last.b):
                    raise HypothesisViolated("two different tiles close the same pair", (last, gen))
                self.note("sym")
                return _mk_g(t.a, t.cross[:-1], t.psi)
            if last.b != last.a.inv():
                raise HypothesisViolated("a tile with one reversed-pair side lacks the other", last)
            self.note("eps-sym")
            inner = _mk_g(t.a, t.cross[:-1], t.psi)
            return self.insert(inner, p - 1, Eps(last.a.inv()))
        # k == p: the strand end meets the first step of g
        if isinstance(gen, Gamma):
            self.note("gamma-extend")
            return _mk_g(t.a, t.cross + (gen,), t.psi)
        nxt = target(t.psi)[p]
        tau = self.gamma(last.b, nxt, last.a.inv(), last.b2, "eps-turn")
        self.note("eps-turn")
        psi = self.insert(t.psi, p - 1, tau)
        inner = _mk_g(t.a, t.cross[:-1], psi)
        return self.insert(inner, p - 1, Eps(last.a.inv()))

    def _ins_h(self, t: H, k: int, gen) -> CanonicalForm:
        q, r = len(t.f), len(t.cross)
        if k + 1 <= q - 1:
            self.note("exchange")
            return _mk_h(q + len(gen.tgt) - len(gen.src), t.a, t.cross, self.insert(t.psi, k, gen))
        if k >= q + r + 2:
            self.note("exchange")
            return _mk_h(q, t.a, t.cross, self.insert(t.psi, k - 2, gen))
        if k == q - 1:
            fl = t.f[-1]
            if isinstance(gen, Gamma):
                s, u = gen.b2, gen.a2
                first = self.gamma(s.inv(), fl, u, t.a.inv(), "eta-turn")
                self.note("eta-turn")
                return _mk_h(q - 1, s, (first,) + t.cross, t.psi)
            self.note("zigzag2")
            psi = t.psi
            for j, x in enumerate(t.cross):
                psi = self.insert(psi, q - 1 + j, x)
            return psi
        if k == q:
            if r == 0:
                if isinstance(gen, Gamma):
                    if gen.a2 != gen.b2.inv():
                        raise HypothesisViolated("a tile with one reversed-pair side lacks the other", gen)
                    self.note("eta-sym")
                    return _mk_h(q, gen.b2, (), t.psi)
                self.note("eps-eta-inv")
                return t.psi
            first = t.cross[0]
            if isinstance(gen, Gamma):
                if gen.b2 != first.b or first.a2 != gen.a2.inv():
                    raise HypothesisViolated("two different tiles close the same pair", (first, gen))
                self.note("eta-nat")
                return _mk_h(q + 1, gen.a2, t.cross[1:], t.psi)
            if first.a2 != first.b:
                raise HypothesisViolated("a degenerate tile moves its strand", first)
            self.note("eta-sym-eps")
            psi = t.psi
            for j, x in enumerate(t.cross[1:]):
                psi = self.insert(psi, q + j, x)
            return psi
        if k + 1 <= q + r:
            j = k - q - 1
            if isinstance(gen, Gamma):
                tau, cross = self.yang_baxter(t.cross, j, gen)
            else:
                tau, cross = self.eps_nat(t.cross, j)
            return _mk_h(q, t.a, cross, self.insert(t.psi, q + j, tau))
        if k == q + r:
            last = t.cross[-1]
            if isinstance(gen, Gamma):
                if (gen.b2, gen.a2) != (last.a, last.b):
                    raise HypothesisViolated("two different tiles close the same pair", (last, gen))
                self.note("sym")
                return _mk_h(q, t.a, t.cross[:-1], t.psi)
            if last.b != last.a.inv():
                raise HypothesisViolated("a tile with one reversed-pair side lacks the other", last)
            self.note("eps-sym")
            inner = _mk_h(q, t.a, t.cross[:-1], t.psi)
            return self.insert(inner, k, Eps(last.a.inv()))
        # k == q + r + 1: the strand end meets the first step of h
        if isinstance(gen, Gamma):
            self.note("gamma-extend")
            return _mk_h(q, t.a, t.cross + (gen,), t.psi)
        if r == 0:
            self.note("zigzag1")
            return t.psi
        last = t.cross[-1]
        nxt = target(t.psi)[q + r]
        tau = self.gamma(last.b, nxt, last.a.inv(), last.b2, "eps-turn")
        self.note("eps-turn")
        psi = self.insert(t.psi, q + r - 1, tau)
        inner = _mk_h(q, t.a, t.cross[:-1], psi)
        return self.insert(inner, q + r, Eps(last.a.inv()))

    # -- operator exchanges that bring every H to the outside

    def lift(self, t: CanonicalForm) -> CanonicalForm:
        """Rewrite ``X(H ψ)`` with ``X`` in ``G``, ``I`` or ``E`` so that ``H`` comes first."""
        h = t.psi
        assert isinstance(h, H)
        q, r = len(h.f), len(h.cross)
        if isinstance(t, E):
            self.note("EH-to-G" if q == 0 else "EH-exchange")
            lifted = _mk_h(q + 1, h.a, h.cross, I(t.a.inv(), h.psi))
            return self.insert(lifted, 0, Eps(t.a))
        p = len(t.cross) if isinstance(t, G) else 0
        if p <= q:
            self.note("GH-exchange")
        elif p <= q + r + 1:
            self.note("GH-through-middle")
        else:
            self.note("GH-through-right")
        out: CanonicalForm = _mk_h(q + 1, h.a, h.cross, I(t.a, h.psi))
        for j, x in enumerate(t.cross if isinstance(t, G) else ()):
            out = self.insert(out, j, x)
        return out

    def normalize(self, t: CanonicalForm) -> CanonicalForm:
        for _ in range(10_000):
            new = self._normalize_once(t)
            if new is None:
                return t
            t = new
        raise RuntimeError("normalization did not terminate")

    def _normalize_once(self, t: CanonicalForm):
        if isinstance(t, Z):
            return None
        if not isinstance(t, H) and isinstance(t.psi, H):
            return self.lift(t)
        inner = self._normalize_once(t.psi)
        if inner is None:
            return None
        if isinstance(t, I):
            return I(t.a, inner)
        if isinstance(t, G):
            return _mk_g(t.a, t.cross, inner)
        if isinstance(t, H):
            return _mk_h(len(t.f), t.a, t.cross, inner)
        return _mk_e(t.a, inner)


def _identity_term(C: PrecubicalSet, s: PathT) -> CanonicalForm:
    t: CanonicalForm = Z(path_end(C, s))
    for a in reversed(s.steps):
        t = I(a, t)
    return t


def rewrite_with_trace(C: PrecubicalSet, phi: FormalTwoCell) -> tuple[CanonicalForm, list[str]]:
    """Canonical form of ``phi`` with the names of the rules applied."""
    problems = validate_cell(C, phi)
    if problems:
        raise InvalidCell("; ".join(problems))
    rw = _Rewriter(C)
    t = _identity_term(C, phi.source)
    for sl in phi.slices:
        t = rw.insert(t, sl.position, sl.gen)
        cur = sl.left.steps + sl.gen.tgt + sl.right.steps
        assert source(t) == phi.source.steps and target(t) == cur, "rewriting changed an endpoint"
    return t, rw.trace


def rewrite_to_canonical(C: PrecubicalSet, phi: FormalTwoCell) -> CanonicalForm:
    return rewrite_with_trace(C, phi)[0]


def normalize_canonical(C: PrecubicalSet, cf: CanonicalForm) -> CanonicalForm:
    """Move every ``H`` outside every ``G``, ``I`` and ``E``; this removes all ``EH`` patterns."""
    src, tgt = source(cf), target(cf)
    out = _Rewriter(C).normalize(cf)
    assert source(out) == src and target(out) == tgt, "normalization changed an endpoint"
    return out


def check_hypotheses(C: PrecubicalSet) -> list[tuple[str, object]]:
    """Violations of the conditions under which rewriting is guaranteed to work."""
    out: list[tuple[str, object]] = []
    rep = geometricity_report(C)
    if not rep.at_most_one_square_closing:
        out.append(("at most one square closing", rep.witnesses.get("at_most_one_square_closing")))
    cube = check_cube_property(C)
    if not cube.ok:
        out.append(("cube property", cube.witness))
    for t in tiles(C):
        if (t.a == t.b2) != (t.a2 == t.b):
            out.append(("folded square on one side only", C.name(2, t.square)))
    return out


def extract_dihomotopy(C: PrecubicalSet, phi: FormalTwoCell) -> list[Move]:
    """Tile moves turning the source dipath of ``phi`` into its target dipath."""
    bad = check_hypotheses(C)
    if bad:
        name, witness = bad[0]
        raise HypothesisViolated(f"the complex violates: {name}", witness)
    if not (phi.source.is_dipath and phi.target.is_dipath):
        raise NonDirectedEndpoint("source and target must both be dipaths")
    cf = normalize_canonical(C, rewrite_to_canonical(C, phi))
    ops = _operators(cf)
    assert "H" not in ops and "E" not in ops, f"canonical form {ops} is not gamma-only"
    cur = phi.source
    moves = []
    for pos, gen in expand(cf):
        m = Move("tile", pos, gen.tgt)
        nxt = PathT(cur.start, _apply(C, cur.steps, pos, gen))
        if nxt != cur and nxt not in dihomotopy_neighbors(C, cur):
            raise AssertionError(f"{m} is not a tile move")
        moves.append(m)
        cur = nxt
    assert cur == phi.target, "extracted moves do not reach the target"
    return moves


# ---------------------------------------------------------------------------
# text forms

_SPECIAL = re.compile(r"[\s()\[\]|~]")


def _atom(name: str) -> str:
    return f"|{name}|" if _SPECIAL.search(name) or not name else name


def _step_str(C, s: Step) -> str:
    return ("~" if s.reversed else "") + _atom(C.name(1, s.edge))


def _seq_str(C, steps) -> str:
    return "[" + " ".join(_step_str(C, s) for s in steps) + "]"


def to_sexpr(C: PrecubicalSet, t: CanonicalForm) -> str:
    """``(Z x)``, ``(I a ψ)``, ``(G a f g f' a' ψ)``, ``(H f a g h g' a' ψ)``, ``(E a f ψ)``.

    Steps are edge names, ``~`` marks a reversed step, ``[…]`` is a path.
    """
    if isinstance(t, Z):
        return f"(Z {_atom(C.name(0, t.x))})"
    inner = to_sexpr(C, t.psi)
    st = lambda s: _step_str(C, s)  # noqa: E731
    sq = lambda s: _seq_str(C, s)  # noqa: E731
    if isinstance(t, I):
        return f"(I {st(t.a)} {inner})"
    if isinstance(t, G):
        return f"(G {st(t.a)} {sq(t.f)} {sq(t.g)} {sq(t.f_out)} {st(t.a_out)} {inner})"
    if isinstance(t, H):
        return f"(H {sq(t.f)} {st(t.a)} {sq(t.g)} {sq(t.h)} {sq(t.g_out)} {st(t.a_out)} {inner})"
    return f"(E {st(t.a)} {sq(t.f)} {inner})"


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\[)|(\])|(~?)(?:\|([^|]*)\||([^\s()\[\]|~]+)))")


def _tokens(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise InvalidCell(f"bad S-expression near {text[pos:pos + 20]!r}")
        if m.group(1) or m.group(2) or m.group(3) or m.group(4):
            out.append(m.group(1) or m.group(2) or m.group(3) or m.group(4))
        else:
            name = m.group(6) if m.group(6) is not None else m.group(7)
            out.append(("~" if m.group(5) else "", name))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _chain(C, start: Step, ins, outs, end: Step | None):
    """Crossings of a strand starting at ``start`` over ``ins`` producing ``outs``."""
    part = _partners(C)

    def rec(cur, j):
        if j == len(ins):
            return [] if end is None or cur == end else None
        for b2, a2 in part.get((cur, ins[j]), ()):
            if b2 == outs[j]:
                rest = rec(a2, j + 1)
                if rest is not None:
                    return [Gamma(cur, ins[j], b2, a2)] + rest
        return None

    res = rec(start, 0)
    if res is None:
        raise InvalidCell("no chain of tiles matches the operator indices")
    return tuple(res)


def parse_sexpr(C: PrecubicalSet, text: str) -> CanonicalForm:
    toks = _tokens(text)
    pos = 0

    def step(tok):
        if not isinstance(tok, tuple):
            raise InvalidCell(f"expected a step, got {tok!r}")
        try:
            return Step(C.lookup(1, tok[1]), tok[0] == "~")
        except KeyError as exc:
            raise InvalidCell(str(exc)) from None

    def seq():
        nonlocal pos
        if toks[pos] != "[":
            raise InvalidCell("expected '['")
        pos += 1
        out = []
        while toks[pos] != "]":
            out.append(step(toks[pos]))
            pos += 1
        pos += 1
        return tuple(out)

    def one():
        nonlocal pos
        s = step(toks[pos])
        pos += 1
        return s

    def term():
        nonlocal pos
        if toks[pos] != "(":
            raise InvalidCell("expected '('")
        op = toks[pos + 1]
        pos += 2
        if not isinstance(op, tuple) or op[0]:
            raise InvalidCell(f"bad operator {op!r}")
        op = op[1]
        if op == "Z":
            tok = toks[pos]
            pos += 1
            try:
                out = Z(C.lookup(0, tok[1]))
            except (KeyError, TypeError) as exc:
                raise InvalidCell(f"bad vertex {tok!r}: {exc}") from None
        elif op == "I":
            a = one()
            out = I(a, term())
        elif op == "G":
            a, f, g, f2, a2 = one(), seq(), seq(), seq(), one()
            psi = term()
            out = _mk_g(a, _chain(C, a, f, f2, a2), psi)
            if target(psi)[len(f):] != g:
                raise InvalidCell("G indices do not match the inner target")
        elif op == "H":
            f, a, g, h, g2, a2 = seq(), one(), seq(), seq(), seq(), one()
            psi = term()
            out = _mk_h(len(f), a, _chain(C, a.inv(), g, g2, a2.inv()), psi)
            if (out.f, out.h) != (f, h):
                raise InvalidCell("H indices do not match the inner target")
        elif op == "E":
            a, f = one(), seq()
            out = _mk_e(a, term())
            if out.f != f:
                raise InvalidCell("E indices do not match the inner target")
        else:
            raise InvalidCell(f"unknown operator {op!r}")
        if toks[pos] != ")":
            raise InvalidCell("expected ')'")
        pos += 1
        return out

    try:
        t = term()
    except IndexError:
        raise InvalidCell("truncated S-expression") from None
    except AssertionError as exc:
        raise InvalidCell(f"ill-typed term: {exc}") from None
    if pos != len(toks):
        raise InvalidCell("trailing tokens")
    return t


_GEN_NAMES = {Gamma: "gamma", Eta: "eta", Eps: "eps"}


def cell_to_json(C: PrecubicalSet, phi: FormalTwoCell) -> dict:
    def st(s):
        return [C.name(1, s.edge), s.reversed]

    slices = []
    for pos, gen in phi.generators():
        steps = list(gen) if isinstance(gen, Gamma) else [gen.a]
        slices.append({"position": pos, "generator": _GEN_NAMES[type(gen)], "steps": [st(s) for s in steps]})
    return {"source": path_to_json(C, phi.source), "target": path_to_json(C, phi.target), "slices": slices}


def cell_from_json(C: PrecubicalSet, data: dict) -> FormalTwoCell:
    kinds = {v: k for k, v in _GEN_NAMES.items()}
    try:
        src = path_from_json(C, data["source"])
        gens = []
        for sl in data["slices"]:
            steps = [Step(e if isinstance(e, int) else C.lookup(1, e), bool(r)) for e, r in sl["steps"]]
            gens.append((int(sl["position"]), kinds[sl["generator"]](*steps)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCell(f"malformed cell: {exc}") from None
    phi = cell_from_generators(C, src, gens)
    if "target" in data and path_from_json(C, data["target"]) != phi.target:
        raise InvalidCell("the slices do not end at the stated target")
    return phi
