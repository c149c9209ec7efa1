"""Hypothesis strategies for types, patterns and terms."""

from hypothesis import strategies as st

from incortype.syntax import (
    Abs, App, Atom, BinOp, Fix, Match, Num, PAtom, PPair, PVar, Pair, RelOp, Var,
    patterns_disjoint, BIN_OPS, REL_OPS,
)
from incortype.types import ATOMS, INT, OK, TOP, Arrow, AtomLit, Comp, PairT, Union

ATOM_NAMES = ("a", "b", "give")
NAMES = ("x", "y", "z", "f")

base_types = st.sampled_from((TOP, OK, ATOMS, INT) + tuple(AtomLit(a) for a in ATOM_NAMES))


def _extend(children, testable):
    arrow = st.builds(Arrow, children, st.just(TOP) if testable else children)
    return st.one_of(
        st.builds(Comp, children),
        st.builds(PairT, children, children),
        arrow,
        st.lists(children, min_size=2, max_size=3).map(lambda ms: Union(tuple(ms))),
    )


types = st.recursive(base_types, lambda c: _extend(c, False), max_leaves=8)
testable_types = st.recursive(base_types, lambda c: _extend(c, True), max_leaves=6)


@st.composite
def patterns(draw, depth=3):
    counter = [0]

    def build(d):
        k = draw(st.integers(0, 2 if d > 0 else 1))
        if k == 0:
            counter[0] += 1
            return PVar(f"v{counter[0]}")
        if k == 1:
            return PAtom(draw(st.sampled_from(ATOM_NAMES)))
        return PPair(build(d - 1), build(d - 1))

    return build(depth)


@st.composite
def terms(draw, depth=4, scope=frozenset()):
    leaves = [st.builds(Atom, st.sampled_from(ATOM_NAMES)), st.builds(Num, st.integers(0, 9))]
    if scope:
        leaves.append(st.builds(Var, st.sampled_from(sorted(scope))))
    if depth <= 0:
        return draw(st.one_of(leaves))
    k = draw(st.integers(0, 9))
    d = depth - 1
    if k == 0:
        return Pair(draw(terms(d, scope)), draw(terms(d, scope)))
    if k == 1:
        x = draw(st.sampled_from(NAMES))
        return Abs(x, draw(terms(d, scope | {x})))
    if k == 2:
        return App(draw(terms(d, scope)), draw(terms(d, scope)))
    if k == 3:
        return BinOp(draw(st.sampled_from(BIN_OPS)), draw(terms(d, scope)), draw(terms(d, scope)))
    if k == 4:
        return RelOp(draw(st.sampled_from(REL_OPS)), draw(terms(d, scope)), draw(terms(d, scope)))
    if k == 5:
        x = draw(st.sampled_from(NAMES))
        return Fix(x, draw(terms(d, scope | {x})))
    if k == 6:
        branches = []
        for p in draw(st.lists(patterns(2), min_size=1, max_size=3)):
            if all(patterns_disjoint(p, q) for q, _ in branches):
                names = set(_pvars(p))
                branches.append((p, draw(terms(d, scope | names))))
        return Match(draw(terms(d, scope)), tuple(branches))
    return draw(st.one_of(leaves))


def _pvars(p):
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PPair):
        return _pvars(p.fst) + _pvars(p.snd)
    return []


closed_terms = terms(4)
open_terms = terms(4, frozenset({"x", "y"}))
