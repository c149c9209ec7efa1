"""Seeded random generators for types, terms, patterns and normal forms."""

import random

from incortype.reduction import classify_nf
from incortype.syntax import (
    Abs, App, Atom, BinOp, Fix, Match, Num, PAtom, PPair, PVar, Pair, RelOp, Var,
    patterns_disjoint,
)
from incortype.types import (
    ATOMS, INT, OK, TOP, Arrow, AtomLit, Comp, PairT, Union,
)

ATOM_NAMES = ("a", "b", "give")
NUMERALS = (0, 1)
_LEAVES = (TOP, OK, ATOMS, INT) + tuple(AtomLit(a) for a in ATOM_NAMES)


def rng_of(seed):
    return random.Random(seed)


def random_type(rng, size=12, testable=False):
    """A type with at most size constructors and leaves."""
    if size <= 1:
        return rng.choice(_LEAVES)
    k = rng.randrange(4) if size >= 3 else rng.choice((0, 4))
    if k == 0:
        return Comp(random_type(rng, size - 1, testable))
    if k in (1, 2):
        left = rng.randint(1, size - 2)
        right = size - 1 - left
        if k == 1:
            return PairT(random_type(rng, left, testable), random_type(rng, right, testable))
        if testable:
            return Arrow(random_type(rng, left, testable), TOP)
        return Arrow(random_type(rng, left), random_type(rng, right))
    if k == 3:
        n = rng.randint(2, min(3, size - 1))
        parts = (size - 1) // n
        return Union(tuple(random_type(rng, parts, testable) for _ in range(n)))
    return rng.choice(_LEAVES)


def random_pattern(rng, depth=3, used=None):
    used = set() if used is None else used
    k = rng.randrange(3) if depth > 0 else rng.randrange(2)
    if k == 0:
        name = f"v{len(used)}"
        used.add(name)
        return PVar(name)
    if k == 1:
        return PAtom(rng.choice(ATOM_NAMES))
    return PPair(random_pattern(rng, depth - 1, used), random_pattern(rng, depth - 1, used))


def _branches(rng, depth, scope):
    out = []
    for _ in range(rng.randint(1, 3)):
        p = random_pattern(rng, 2)
        if all(patterns_disjoint(p, q) for q, _ in out):
            names = scope | {x for x in _pvars(p)}
            out.append((p, random_term(rng, depth - 1, names)))
    return tuple(out)


def _pvars(p):
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PPair):
        return _pvars(p.fst) + _pvars(p.snd)
    return []


def random_term(rng, depth=4, scope=frozenset()):
    """A term whose free variables lie in scope."""
    leaves = [lambda: Atom(rng.choice(ATOM_NAMES)), lambda: Num(rng.choice(NUMERALS))]
    if scope:
        leaves.append(lambda: Var(rng.choice(sorted(scope))))
    if depth <= 0:
        return rng.choice(leaves)()
    k = rng.randrange(9)
    d = depth - 1
    if k == 0:
        return Pair(random_term(rng, d, scope), random_term(rng, d, scope))
    if k == 1:
        x = rng.choice(("x", "y", "z"))
        return Abs(x, random_term(rng, d, scope | {x}))
    if k == 2:
        return App(random_term(rng, d, scope), random_term(rng, d, scope))
    if k == 3:
        return BinOp(rng.choice(("add", "sub", "mul")), random_term(rng, d, scope), random_term(rng, d, scope))
    if k == 4:
        return RelOp(rng.choice(("eq", "lt")), random_term(rng, d, scope), random_term(rng, d, scope))
    if k == 5:
        return Match(random_term(rng, d, scope), _branches(rng, depth, scope))
    if k == 6 and rng.random() < 0.3:
        x = rng.choice(("f", "g"))
        return Fix(x, Abs("n", random_term(rng, d, scope | {x, "n"})))
    return rng.choice(leaves)()


def term_depth(t):
    if isinstance(t, (Var, Atom, Num)):
        return 0
    if isinstance(t, (Abs, Fix)):
        return 1 + term_depth(t.body)
    if isinstance(t, (Pair,)):
        return 1 + max(term_depth(t.fst), term_depth(t.snd))
    if isinstance(t, App):
        return 1 + max(term_depth(t.fun), term_depth(t.arg))
    if isinstance(t, (BinOp, RelOp)):
        return 1 + max(term_depth(t.lhs), term_depth(t.rhs))
    return 1 + max([term_depth(t.scrutinee)] + [term_depth(n) for _, n in t.branches])


def random_value(rng, depth):
    k = rng.choice((0, 1, 2, 3, 3)) if depth > 0 else rng.randrange(2)
    if k == 0:
        return Atom(rng.choice(ATOM_NAMES))
    if k == 1:
        return Num(rng.choice(NUMERALS))
    if k == 2:
        return Abs("x", random_term(rng, depth - 1, frozenset({"x"})))
    return Pair(random_value(rng, depth - 1), random_value(rng, depth - 1))


def random_stuck(rng, depth):
    """A stuck term built from the stuck grammar, depth >= 1."""
    d = depth - 1
    sub = (lambda: random_stuck(rng, d)) if d >= 1 else (lambda: random_value(rng, 0))
    k = rng.randrange(7)
    if k == 0 and d >= 1:
        return Pair(random_stuck(rng, d), random_term(rng, d))
    if k == 1 and d >= 1:
        return Pair(random_value(rng, d), random_stuck(rng, d))
    if k == 2:
        head = rng.choice([random_value(rng, d), sub()])
        if isinstance(head, Abs):
            head = Num(rng.choice(NUMERALS))
        return App(head, random_term(rng, d))
    if k == 3:
        head = rng.choice([random_value(rng, d), sub()])
        if isinstance(head, Num):
            head = Atom(rng.choice(ATOM_NAMES))
        return BinOp("add", head, random_term(rng, d))
    if k == 4:
        arg = rng.choice([random_value(rng, d), sub()])
        if isinstance(arg, Num):
            arg = Pair(Num(0), Num(1))
        return RelOp("lt", Num(rng.choice(NUMERALS)), arg)
    scrut = rng.choice([random_value(rng, d), sub()])
    miss = "a" if scrut == Atom("give") else "give"
    return Match(scrut, ((PAtom(miss), Num(0)),))


def random_normal_form(rng, depth=5):
    """A closed normal form of depth at most depth, value or stuck."""
    while True:
        t = random_value(rng, depth) if rng.random() < 0.5 else random_stuck(rng, rng.randint(1, depth))
        if term_depth(t) <= depth and classify_nf(t) in ("value", "stuck"):
            return t
