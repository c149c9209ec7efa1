import pytest
from hypothesis import given, settings

from incortype.parser import (
    ParseError, parse_derivation, parse_script, parse_sequent, parse_term, parse_type,
)
from incortype.sequent import Formula
from incortype.syntax import (
    Abs, App, Atom, BinOp, Match, Num, PAtom, PPair, PVar, Var, alpha_eq, let_in, projection,
    show_term,
)
from incortype.types import (
    INT, OK, TOP, Arrow, AtomLit, Comp, PairT, Union, canonical, show_type,
)
from gen import random_term, random_type, rng_of
from strategies import open_terms, types


def test_lambda():
    assert parse_term("fun x -> x + 1") == Abs("x", BinOp("add", Var("x"), Num(1)))


def test_let_program():
    t = parse_term("let op = fun x -> fun y -> x + y in op 5 'you")
    op = Abs("x", Abs("y", BinOp("add", Var("x"), Var("y"))))
    assert t == let_in("op", op, App(App(Var("op"), Num(5)), Atom("you")))
    assert t == App(Abs("op", App(App(Var("op"), Num(5)), Atom("you"))), op)


def test_match_example():
    t = parse_term("match x with | 'err -> 0 | ('data, n) -> n end")
    want = Match(Var("x"), ((PAtom("err"), Num(0)), (PPair(PAtom("data"), PVar("n")), Var("n"))))
    assert t == want


def test_projection_sugar():
    assert parse_term("pi2 x") == projection(Var("x"), 2)


def test_type_examples():
    assert parse_type("Top -> Int onlyto Ok") == Arrow(TOP, Arrow(Comp(INT), Comp(OK)))
    assert parse_type("~(~Int -> ~Ok)") == parse_type("Int coto Ok")
    assert parse_type("Bot") == Comp(TOP)
    assert parse_type("('data, Int) \\/ 'err") == Union((PairT(AtomLit("data"), INT), AtomLit("err")))


def test_parse_errors():
    for src in ("fun -> x", "match x with | 'a -> 1", "(1, 2", "x +"):
        with pytest.raises(ParseError):
            parse_term(src)
    with pytest.raises(ParseError):
        parse_type("Int ->")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_term("1 + )")
    assert "column" in str(e.value)


def test_var_node():
    d = parse_derivation("(Var :principal x : Int)", parse_sequent("x : Int |- x : Int"))
    assert d.rule == "Var" and d.premises == () and d.principal == Formula(Var("x"), INT)


def test_script_headers():
    sc = parse_script(
        "system: two-sided\nexpect: reject schema\nconclusion: |- 3 : Fun\n"
        "derivation:\n(Num :principal 3 : Fun)\n")
    assert sc.system == "two-sided" and sc.expect == "reject" and sc.reject_tag == "schema"


def test_script_named_definitions():
    sc = parse_script(
        "system: two-sided\nexpect: accept\nterm N = 3\ntype T = Int\n"
        "conclusion: |- @N : @T\nderivation:\n(Num :principal @N : @T)\n")
    assert sc.derivation.principal == Formula(Num(3), INT)


def test_term_round_trip_ten_thousand():
    rng = rng_of(7)
    for _ in range(10_000):
        t = random_term(rng, 4, frozenset({"x"}))
        assert alpha_eq(parse_term(show_term(t)), t), show_term(t)


def test_type_round_trip_ten_thousand():
    rng = rng_of(8)
    for _ in range(10_000):
        a = random_type(rng, rng.randint(1, 14))
        assert canonical(parse_type(show_type(a))) == canonical(a), show_type(a)


@settings(max_examples=300, deadline=None)
@given(open_terms)
def test_term_round_trip_property(t):
    assert alpha_eq(parse_term(show_term(t)), t)


@settings(max_examples=300, deadline=None)
@given(types)
def test_type_round_trip_property(a):
    assert canonical(parse_type(show_type(a))) == canonical(a)
