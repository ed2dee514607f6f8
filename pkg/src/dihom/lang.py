"""A small concurrent language with mutexes and its precubical semantics.

Concrete syntax (whitespace insensitive, ``#`` starts a line comment)::

    prog   := choice
    choice := par ("+" par)*
    par    := seq ("||" seq)*
    seq    := atom (";" atom)*
    atom   := "1" | "*" atom | "P(" ident ")" | "V(" ident ")" | ident | "(" prog ")"

Binary operators associate to the left.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .pcs_core import (
    PrecubicalSet,
    Step,
    coproduct,
    quotient_vertices,
    remove_vertices_with_maps,
    tensor,
    tensor_vertex,
)

NOP = "nop"
RESERVED = {NOP, "P", "V"}


# ---------------------------------------------------------------------------
# syntax


class Program:
    def __str__(self) -> str:
        return unparse(self)


@dataclass(frozen=True)
class One(Program):
    pass


@dataclass(frozen=True)
class Action(Program):
    name: str


@dataclass(frozen=True)
class P(Program):
    mutex: str


@dataclass(frozen=True)
class V(Program):
    mutex: str


@dataclass(frozen=True)
class Seq(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Or(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Par(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Star(Program):
    body: Program


_PREC = {Or: 0, Par: 1, Seq: 2}
_OPS = {Or: " + ", Par: " || ", Seq: ";"}


def unparse(p: Program, ctx: int = 0) -> str:
    """Concrete syntax for ``p``, with only the parentheses that are needed."""
    if isinstance(p, One):
        return "1"
    if isinstance(p, Action):
        return p.name
    if isinstance(p, P):
        return f"P({p.mutex})"
    if isinstance(p, V):
        return f"V({p.mutex})"
    if isinstance(p, Star):
        return "*" + unparse(p.body, 3)
    prec = _PREC[type(p)]
    text = unparse(p.left, prec) + _OPS[type(p)] + unparse(p.right, prec + 1)
    return f"({text})" if prec < ctx else text


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.msg, self.line, self.col = msg, line, col


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)|(?P<par>\|\|)"
    r"|(?P<sym>[+;*()])|(?P<num>[0-9][A-Za-z0-9_]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)


def _tokenize(text: str) -> list[_Tok]:
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "num":
            if m.group() != "1":
                raise ParseError(f"unexpected number {m.group()!r}", line, col)
            toks.append(_Tok("1", "1", line, col))
        elif kind == "par":
            toks.append(_Tok("||", "||", line, col))
        elif kind == "sym":
            toks.append(_Tok(m.group(), m.group(), line, col))
        elif kind == "ident":
            toks.append(_Tok("ident", m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {kind!r} but found {what}", t.line, t.col)
        self.i += 1
        return t

    def prog(self) -> Program:
        p = self.binary(Or, "+", lambda: self.binary(Par, "||", lambda: self.binary(Seq, ";", self.atom)))
        return p

    def binary(self, cls, op, sub):
        p = sub()
        while self.peek().kind == op:
            self.i += 1
            p = cls(p, sub())
        return p

    def ident(self) -> str:
        t = self.take("ident")
        if t.text in RESERVED:
            raise ParseError(f"reserved name {t.text!r}", t.line, t.col)
        return t.text

    def atom(self) -> Program:
        t = self.peek()
        if t.kind == "1":
            self.i += 1
            return One()
        if t.kind == "*":
            self.i += 1
            return Star(self.atom())
        if t.kind == "(":
            self.i += 1
            p = self.prog()
            self.take(")")
            return p
        if t.kind == "ident":
            if t.text in ("P", "V") and self.peek(1).kind == "(":
                self.i += 2
                name = self.ident()
                self.take(")")
                return P(name) if t.text == "P" else V(name)
            return Action(self.ident())
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.line, t.col)


def parse(text: str) -> Program:
    """Parse concrete syntax into a :class:`Program`."""
    ps = _Parser(text)
    p = ps.prog()
    ps.take("eof")
    return p


def subterms(p: Program) -> Iterator[Program]:
    yield p
    for child in _children(p):
        yield from subterms(child)


def _children(p: Program):
    if isinstance(p, (Seq, Or, Par)):
        return (p.left, p.right)
    if isinstance(p, Star):
        return (p.body,)
    return ()


def lint(p: Program) -> list[str]:
    """Warnings about constructs that may break geometricity of the semantics."""
    out = []
    n = sum(1 for q in subterms(p) if isinstance(q, One))
    if n:
        out.append(f"program uses the empty program '1' ({n} occurrence(s)); its semantics may not be geometric")
    for q in subterms(p):
        if isinstance(q, Star) and isinstance(q.body, (Action, P, V, Star)):
            # the loop closes into a cycle of two edges between the same vertices
            out.append(f"loop {unparse(q)} has a single-edge body; its semantics is not geometric")
    return out


def mutexes(p: Program) -> set[str]:
    return {q.mutex for q in subterms(p) if isinstance(q, (P, V))}


# ---------------------------------------------------------------------------
# resource consumption


class NonConservative(ValueError):
    def __init__(self, term: Program, reason: str):
        super().__init__(f"{reason} in {unparse(term)}")
        self.term, self.reason = term, reason


def _add(u: dict, v: dict) -> dict:
    out = dict(u)
    for k, x in v.items():
        out[k] = out.get(k, 0) + x
        if out[k] == 0:
            del out[k]
    return out


def delta(p: Program) -> dict[str, int]:
    """Net mutex consumption of ``p`` (absent mutexes are 0).

    Raises :class:`NonConservative` for a choice with unequal branches or a
    loop whose body is unbalanced.
    """
    if isinstance(p, (One, Action)):
        return {}
    if isinstance(p, P):
        return {p.mutex: -1}
    if isinstance(p, V):
        return {p.mutex: 1}
    if isinstance(p, (Seq, Par)):
        return _add(delta(p.left), delta(p.right))
    if isinstance(p, Or):
        a, b = delta(p.left), delta(p.right)
        if a != b:
            raise NonConservative(p, "branches consume different resources")
        return a
    if isinstance(p, Star):
        if delta(p.body):
            raise NonConservative(p, "loop body does not release what it takes")
        return {}
    raise TypeError(f"not a program: {p!r}")


def is_conservative(p: Program) -> bool:
    try:
        delta(p)
    except NonConservative:
        return False
    return True


def label_delta(label: str | None) -> dict[str, int]:
    """Consumption of a single edge label (``P a`` / ``V a`` / anything else)."""
    if label:
        parts = label.split()
        if len(parts) == 2 and parts[0] == "P":
            return {parts[1]: -1}
        if len(parts) == 2 and parts[0] == "V":
            return {parts[1]: 1}
    return {}


# ---------------------------------------------------------------------------
# semantics


class PointedPcs(NamedTuple):
    pcs: PrecubicalSet
    beg: int
    end: int


def _edge(label: str) -> PointedPcs:
    return PointedPcs(PrecubicalSet.build((2, 1), [[[0]]], [[[1]]], {0: label}), 0, 1)


def _seq(A: PointedPcs, B: PointedPcs) -> PointedPcs:
    n = A.pcs.count(0)
    C, vmap = quotient_vertices(coproduct(A.pcs, B.pcs), [(A.end, n + B.beg)])
    return PointedPcs(C, vmap[A.beg], vmap[n + B.end])


def cs_semantics(p: Program) -> PointedPcs:
    """The un-pruned compositional semantics of ``p``.

    Choice and loop prefix their operands with a ``nop`` edge before
    gluing, so no edge is ever contracted.
    """
    if isinstance(p, One):
        return PointedPcs(PrecubicalSet.build((1,), [], []), 0, 0)
    if isinstance(p, Action):
        return _edge(p.name)
    if isinstance(p, P):
        return _edge(f"P {p.mutex}")
    if isinstance(p, V):
        return _edge(f"V {p.mutex}")
    if isinstance(p, Seq):
        return _seq(cs_semantics(p.left), cs_semantics(p.right))
    if isinstance(p, Or):
        A = _seq(_edge(NOP), cs_semantics(p.left))
        B = _seq(_edge(NOP), cs_semantics(p.right))
        n = A.pcs.count(0)
        C, vmap = quotient_vertices(coproduct(A.pcs, B.pcs), [(A.beg, n + B.beg), (A.end, n + B.end)])
        return PointedPcs(C, vmap[A.beg], vmap[A.end])
    if isinstance(p, Par):
        A, B = cs_semantics(p.left), cs_semantics(p.right)
        C = tensor(A.pcs, B.pcs)
        return PointedPcs(C, tensor_vertex(A.pcs, B.pcs, A.beg, B.beg), tensor_vertex(A.pcs, B.pcs, A.end, B.end))
    if isinstance(p, Star):
        A = _seq(_edge(NOP), cs_semantics(p.body))
        N = _edge(NOP)
        n = A.pcs.count(0)
        C, vmap = quotient_vertices(coproduct(A.pcs, N.pcs), [(A.beg, A.end), (A.beg, n + N.beg)])
        return PointedPcs(C, vmap[A.beg], vmap[n + N.end])
    raise TypeError(f"not a program: {p!r}")


class InconsistentPotential(ValueError):
    def __init__(self, vertex: int, path1: list[Step], path2: list[Step]):
        super().__init__(f"two paths to vertex {vertex} consume different resources")
        self.vertex, self.path1, self.path2 = vertex, path1, path2


def potential(pp: PointedPcs) -> dict[int, dict[str, int]]:
    """Resource potential of every vertex reachable from ``beg``.

    Computed by breadth-first search over edges in both directions; a second
    route giving a different value raises :class:`InconsistentPotential`
    with both routes as witnesses.
    """
    C = pp.pcs
    pot = {pp.beg: {}}
    parent: dict[int, tuple[int, Step] | None] = {pp.beg: None}

    def route(v):
        out = []
        while parent[v] is not None:
            u, s = parent[v]
            out.append(s)
            v = u
        return out[::-1]

    queue = deque([pp.beg])
    while queue:
        v = queue.popleft()
        for s in C.incidence[v]:
            d = label_delta(C.labels.get(s.edge))
            if s.reversed:
                d = {k: -x for k, x in d.items()}
            w = C.step_tgt(s)
            val = _add(pot[v], d)
            if w not in pot:
                pot[w] = val
                parent[w] = (v, s)
                queue.append(w)
            elif pot[w] != val:
                raise InconsistentPotential(w, route(w), route(v) + [s])
    return pot


def is_forbidden(vec: dict[str, int]) -> bool:
    return any(x < -1 or x > 0 for x in vec.values())


class BegForbidden(ValueError):
    """The start (or end) vertex of a program is itself forbidden."""


def semantics(p: Program) -> PointedPcs:
    """Compositional semantics with forbidden vertices removed."""
    delta(p)
    pp = cs_semantics(p)
    pot = potential(pp)
    X = {v for v, vec in pot.items() if is_forbidden(vec)}
    for name, v in (("beg", pp.beg), ("end", pp.end)):
        if v in X:
            raise BegForbidden(f"{name} vertex is forbidden in {unparse(p)}")
    C, maps = remove_vertices_with_maps(pp.pcs, X)
    return PointedPcs(C, maps[0][pp.beg], maps[0][pp.end])


def forbidden_vertices(pp: PointedPcs) -> set[int]:
    return {v for v, vec in potential(pp).items() if is_forbidden(vec)}
