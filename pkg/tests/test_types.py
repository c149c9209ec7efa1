import pytest
from hypothesis import given, settings

from incortype.syntax import PAtom, PPair, PVar
from incortype.types import (
    BOOL, BOT, FUN, INT, OK, PAIR, PAIRVAL, TOP, Arrow, AtomLit, Comp, DomainMismatchError,
    PairT, Union, canonical, coto, expand_abbrev, instantiate_pattern, meet, onlyto,
    show_type, subexpressions, theta_ok, type_size,
)
from incortype.subtyping import subtype
from strategies import patterns, types


def test_expand_abbrev_examples():
    assert expand_abbrev("Fun") == Arrow(Comp(TOP), TOP)
    assert expand_abbrev("onlyto", INT, OK) == Arrow(Comp(INT), Comp(OK))
    a = AtomLit("a")
    assert expand_abbrev("meet", [a]) == Comp(Union((Comp(a),)))


def test_named_abbreviations():
    assert expand_abbrev("Bot") == BOT == Comp(TOP)
    assert expand_abbrev("Pair") == PAIR == PairT(TOP, TOP)
    assert expand_abbrev("PairVal") == PAIRVAL == PairT(OK, OK)
    assert expand_abbrev("Bool") == BOOL
    assert coto(INT, OK) == Comp(onlyto(INT, OK))
    with pytest.raises(KeyError):
        expand_abbrev("Nat")


def test_instantiate_pattern_examples():
    p = PPair(PVar("x"), PVar("y"))
    assert instantiate_pattern(p, {"x": Arrow(INT, INT), "y": INT}) == PairT(Arrow(INT, INT), INT)
    assert instantiate_pattern(PAtom("give"), {}) == AtomLit("give")
    q = PPair(PAtom("give"), PPair(PVar("y"), PVar("z")))
    assert instantiate_pattern(q, {"y": OK, "z": OK}) == PairT(AtomLit("give"), PairT(OK, OK))


def test_instantiate_pattern_domain_mismatch():
    with pytest.raises(DomainMismatchError):
        instantiate_pattern(PVar("x"), {})
    with pytest.raises(DomainMismatchError):
        instantiate_pattern(PAtom("a"), {"x": INT})


def test_theta_ok_examples():
    assert theta_ok(PVar("x")) == {"x": OK}
    assert theta_ok(PAtom("a")) == {}
    assert theta_ok(PPair(PVar("y"), PVar("z"))) == {"y": OK, "z": OK}


@settings(max_examples=1000, deadline=None)
@given(patterns())
def test_ok_instance_below_ok(p):
    assert subtype(instantiate_pattern(p, theta_ok(p)), OK)


@settings(max_examples=300, deadline=None)
@given(types)
def test_canonical_idempotent(a):
    c = canonical(a)
    assert canonical(c) == c


@settings(max_examples=200, deadline=None)
@given(types)
def test_canonical_preserves_meaning(a):
    c = canonical(a)
    assert subtype(a, c) and subtype(c, a)


def test_canonical_flattens_and_sorts():
    a, b = AtomLit("a"), AtomLit("b")
    assert canonical(Union((b, Union((a, b))))) == canonical(Union((a, b)))
    assert canonical(Comp(Comp(INT))) == Comp(Comp(INT))


def test_size_and_subexpressions():
    t = PairT(INT, Comp(INT))
    assert type_size(t) == 4
    assert subexpressions(t) == {t, INT, Comp(INT)}


def test_show_type_abbreviations():
    assert show_type(onlyto(INT, OK)) == "Int onlyto Ok"
    assert show_type(onlyto(TOP, INT)) == "Bot -> ~Int"
    assert show_type(FUN) == "Fun"
    assert show_type(coto(INT, INT)) == "Int coto Int"
    assert show_type(meet([INT, OK])) == "Int /\\ Ok"
