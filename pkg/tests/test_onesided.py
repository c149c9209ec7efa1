from pathlib import Path

import pytest
from hypothesis import given, settings

from incortype import onesided as one
from incortype import typing as two
from incortype.parser import parse_derivation, parse_script, parse_sequent
from incortype.sequent import Formula, seq
from incortype.syntax import Num, Var
from incortype.types import INT, OK, TOP, Comp
from strategies import types

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def os_tree(text, concl):
    return parse_derivation(text, parse_sequent(concl), system="one-sided")


def two_tree(text, concl):
    return parse_derivation(text, parse_sequent(concl))


def rules(d):
    out = [d.rule]
    for p in d.premises:
        out += rules(p)
    return out


def size(d):
    return 1 + sum(size(p) for p in d.premises)


def test_comp_accepted():
    d = os_tree("(Comp :principal x : ~Int :premises (Top :principal y : Top))", "|- x : ~Int; y : Top")
    assert d.premises[0].conclusion == seq([Formula(Var("x"), INT)], [Formula(Var("y"), TOP)])
    assert one.check_one_sided(d).ok


def test_subl_rejected():
    sc = parse_script((CORPUS / "os_reject_subl.script").read_text())
    r = one.check_one_sided(sc.derivation)
    assert not r.ok and two.reason_tag(r.reason) == "rule"


def test_left_formulas_must_be_variables():
    sc = parse_script((CORPUS / "os_reject_left.script").read_text())
    r = one.check_one_sided(sc.derivation)
    assert not r.ok and two.reason_tag(r.reason) == "left-variable"


def test_match_error_accepted():
    sc = parse_script((CORPUS / "os_matche.script").read_text())
    assert sc.derivation.rule == "MatchE"
    assert sc.derivation.principal.type == Comp(OK)
    assert one.check_one_sided(sc.derivation).ok


def test_weak_r_over_axiom():
    d = os_tree("(Num :principal 5 : Int)", "|- 5 : Int")
    q = Formula(Var("q"), Comp(INT))
    w = one.weak_r(d, q)
    assert w.conclusion == seq([], [Formula(Num(5), INT), q])
    assert one.check_one_sided(w).ok


@settings(max_examples=100, deadline=None)
@given(types)
def test_weak_r_keeps_node_count(a):
    d = os_tree("(Comp :principal x : ~Int :premises (Var :principal x : Int))", "|- x : ~Int; x : Int")
    w = one.weak_r(d, Formula(Var("q"), a))
    assert size(w) == size(d)
    assert one.check_one_sided(w).ok


def test_swap_l0():
    d = os_tree("(Comp :principal x : ~Int :premises (Var :principal x : Int))", "|- x : ~Int; x : Int")
    out = one.swap_l0(d, "x", INT)
    assert out.conclusion == seq([Formula(Var("x"), INT)], [Formula(Var("x"), INT)])
    assert one.check_one_sided(out).ok


def test_comp_l0_var_case():
    d = os_tree("(Comp :principal x : ~Int :premises (Var :principal x : Int))", "|- x : ~Int; x : Int")
    out = one.comp_l0(d, Formula(Var("x"), INT))
    assert rules(out) == ["Sub", "Var"]
    assert out.conclusion == seq([Formula(Var("x"), Comp(INT))], [Formula(Var("x"), Comp(INT))])
    assert one.check_one_sided(out).ok


def test_comp_l0_needs_variable():
    d = os_tree("(Num :principal 5 : Int)", "|- 5 : Int")
    with pytest.raises(one.FreshnessError):
        one.comp_l0(d, Formula(Num(5), INT))


def test_elaborate_admissible_dispatch():
    d = os_tree("(Num :principal 5 : Int)", "|- 5 : Int")
    f = Formula(Var("y"), INT)
    assert one.elaborate_admissible("WeakL-var", d, f).conclusion.left == {f}
    with pytest.raises(two.ElaborationError):
        one.elaborate_admissible("Cut", d, None)


def test_var_translates_to_var_and_comp():
    v = two_tree("(Var :principal x : Int)", "x : Int |- x : Int")
    t = one.translate_two_to_one(v)
    assert rules(t) == ["Comp", "Var"]
    assert t.conclusion == seq([], [Formula(Var("x"), Comp(INT)), Formula(Var("x"), INT)])
    assert one.check_one_sided(t).ok


def test_compl_translates_to_sub():
    d = two_tree("(CompL :principal 5 : ~Int :premises (Num :principal 5 : Int))", "5 : ~Int |-")
    t = one.translate_two_to_one(d)
    assert t.rule == "Sub" and t.principal.type == Comp(Comp(INT)) and t.witness == INT
    assert t.conclusion == one.target_of(d.conclusion)
    assert one.check_one_sided(t).ok


def test_right_only_tree_unchanged_both_ways():
    sc = parse_script((CORPUS / "relop.script").read_text())
    d = two.elaborate(sc.derivation)
    assert not d.conclusion.left
    assert one.translate_two_to_one(d) == d
    assert one.translate_one_to_two(d) == d


def test_one_sided_comp_back_to_compr():
    d = os_tree("(Comp :principal x : ~Int :premises (Var :principal x : Int))", "|- x : ~Int; x : Int")
    t = one.translate_one_to_two(d)
    assert t.rule == "CompR"
    assert two.check(two.elaborate(t)).ok


def test_one_sided_app_error_back_through_swap():
    sc = parse_script((CORPUS / "os_appe.script").read_text())
    t = one.translate_one_to_two(sc.derivation)
    assert "AppE" in rules(t)
    assert two.check(two.elaborate(t)).ok


def test_negate_and_target():
    s = seq([Formula(Var("x"), INT)], [Formula(Num(1), OK)])
    assert one.target_of(s) == seq([], [Formula(Var("x"), Comp(INT)), Formula(Num(1), OK)])
    assert one.negate(s.left) == {Formula(Var("x"), Comp(INT))}
