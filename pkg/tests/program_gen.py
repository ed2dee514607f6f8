"""Seeded random conservative programs for property suites."""

from __future__ import annotations

import random

from dihom import lang
from dihom.lang import Action, One, Or, P, Par, Seq, Star, V

MUTEXES = ("a", "b", "c")
ACTIONS = ("x", "y")


def depth(p: lang.Program) -> int:
    kids = list(lang._children(p))
    return 1 + max((depth(k) for k in kids), default=0)


def width(p: lang.Program) -> int:
    """Number of parallel threads."""
    if isinstance(p, Par):
        return width(p.left) + width(p.right)
    return max((width(k) for k in lang._children(p)), default=1)


def _atom(rng: random.Random, mutexes) -> lang.Program:
    r = rng.random()
    if r < 0.05:
        return One()
    if r < 0.2:
        return Action(rng.choice(ACTIONS))
    m = rng.choice(mutexes)
    return P(m) if r < 0.6 else V(m)


def _locked(rng, mutexes, budget):
    """``P(m);body;V(m)`` when the budget allows, else a bare pair."""
    m = rng.choice(mutexes)
    if budget >= 3 and rng.random() < 0.5:
        return Seq(Seq(P(m), _thread(rng, mutexes, budget - 2)), V(m))
    return Seq(P(m), V(m))


def _thread(rng, mutexes, budget):
    if budget <= 1:
        return _atom(rng, mutexes)
    r = rng.random()
    if r < 0.45:
        return _locked(rng, mutexes, budget)
    if r < 0.6:
        return Or(_thread(rng, mutexes, budget - 1), _thread(rng, mutexes, budget - 1))
    if r < 0.7:
        return Star(_thread(rng, mutexes, budget - 1))
    return Seq(_thread(rng, mutexes, budget - 1), _thread(rng, mutexes, budget - 1))


def random_program(rng: random.Random, max_depth: int = 4, max_threads: int = 3, max_mutexes: int = 3,
                   allow_one: bool = True) -> lang.Program:
    """Draw until the program is conservative, has well-defined semantics,
    and meets the depth, thread and mutex bounds."""
    while True:
        mutexes = MUTEXES[: rng.randint(1, max_mutexes)]
        n = rng.randint(1, max_threads)
        tb = max_depth - (n - 1)
        threads = [_thread(rng, mutexes, rng.randint(1, tb)) for _ in range(n)]
        p = threads[0]
        for t in threads[1:]:
            p = Par(p, t)
        if depth(p) > max_depth or width(p) > max_threads:
            continue
        if not allow_one and any(isinstance(q, One) for q in lang.subterms(p)):
            continue
        try:
            lang.semantics(p)
        except (lang.NonConservative, lang.InconsistentPotential, lang.BegForbidden):
            continue
        return p


def random_programs(count: int, seed: int = 0, **bounds) -> list[lang.Program]:
    rng = random.Random(seed)
    seen, out = set(), []
    while len(out) < count:
        p = random_program(rng, **bounds)
        key = lang.unparse(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out
