"""Acceptance criteria 1 to 10, one pass/fail line each.

Run under pytest, or directly with `python3 tests/test_acceptance.py`."""

import sys
import time
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from incortype import onesided as one  # noqa: E402
from incortype.cli import Verdict, dynamic_status  # noqa: E402
from incortype import typing as two  # noqa: E402
from incortype.oracle import DEFAULT_UNIVERSE, NfUniverse, denotation  # noqa: E402
from incortype.parser import parse_term, parse_type  # noqa: E402
from incortype.reduction import WentWrong, classify_nf, evaluate  # noqa: E402
from incortype.sequent import seq  # noqa: E402
from incortype.subtyping import Decider, prove, subtype, type_equiv  # noqa: E402
from incortype.syntax import Atom, BinOp, Num, alpha_eq  # noqa: E402
from incortype.types import OK, Comp, Union, coto, meet, type_size  # noqa: E402
from corpus_tools import CORPUS, accepted, diagnose, mutants, scripts  # noqa: E402
from gen import random_normal_form, random_type, rng_of  # noqa: E402
from test_subtyping import CHOICE_RULES, GOLDEN  # noqa: E402


def _script(name):
    return dict(scripts())[name]


def _rules(d):
    return d.rules()


def _result(ok, detail):
    return bool(ok), detail


@lru_cache(maxsize=None)
def criterion_1():
    start = time.perf_counter()
    problems = []
    for k in (1, 2, 3):
        sc = _script(f"hebert{k}.script")
        c = sc.derivation.conclusion
        (f,) = c.left or (None,)
        if c.right or f is None or f.type != OK:
            problems.append(f"hebert{k}: conclusion is not `program : Ok |-`")
            continue
        program = parse_term((CORPUS / f"hebert{k}.term").read_text())
        if not alpha_eq(program, f.subject):
            problems.append(f"hebert{k}: script subject differs from the .term program")
        if not two.verify(sc.derivation).ok:
            problems.append(f"hebert{k}: check failed")
        r = evaluate(program, 10_000)
        if not isinstance(r, WentWrong):
            problems.append(f"hebert{k}: eval gave {type(r).__name__}")
        elif k == 1 and r.stuck != BinOp("add", Num(5), Atom("you")):
            problems.append("hebert1: wrong stuck term")
    elapsed = time.perf_counter() - start
    if elapsed >= 5:
        problems.append(f"took {elapsed:.2f}s")
    return _result(not problems, "; ".join(problems) or f"3 scripts checked, 3 programs go wrong, {elapsed:.2f}s")


@lru_cache(maxsize=None)
def criterion_2():
    problems = []
    ii = coto(parse_type("Int"), parse_type("Int"))
    want = {
        "twice.script": (parse_term("fun f -> fun x -> f (f x)"), coto(ii, ii)),
        "add2.script": (parse_term("fun x -> x + 2"), ii),
    }
    for name, (term, ty) in want.items():
        d = _script(name).derivation
        (f,) = d.conclusion.left
        if d.conclusion.right or not alpha_eq(f.subject, term) or f.type != ty:
            problems.append(f"{name}: unexpected conclusion")
        if "CoAbs" not in _rules(d):
            problems.append(f"{name}: no CoAbs step")
        if not two.verify(d).ok:
            problems.append(f"{name}: check failed")
    comp = _script("twice_add2.script").derivation
    if "CoApp" not in _rules(comp) or not two.verify(comp).ok:
        problems.append("twice_add2.script: composition not certified by CoApp")
    return _result(not problems, "; ".join(problems) or "twice, add2 and their composition accepted")


@lru_cache(maxsize=None)
def criterion_3():
    start = time.perf_counter()
    wrong, used = [], set()
    for lhs, rhs, expected in GOLDEN:
        d = prove(parse_type(lhs), parse_type(rhs))
        if (d is not None) != expected:
            wrong.append(f"{lhs} <= {rhs}")
        if d is not None:
            used |= d.rules_used()
    elapsed = time.perf_counter() - start
    required = [("Int", "Ok", True), ("Int -> Int", "Int -> Ok", True), ("Atoms -> Int", "Int", False),
                ("Int -> Int", "~(Int -> Ok)", False), ("~~Int", "Int", True), ("Int", "~~Int", True)]
    missing = [q for q in required if q not in GOLDEN]
    ok = len(GOLDEN) >= 40 and not wrong and not missing and CHOICE_RULES <= used and elapsed < 1
    detail = (f"{len(GOLDEN)} queries, {len(wrong)} wrong, choice rules unused: "
              f"{sorted(CHOICE_RULES - used) or 'none'}, {elapsed:.3f}s")
    return _result(ok, detail)


@lru_cache(maxsize=None)
def criterion_4():
    rng = rng_of(4)
    pairs = [(random_type(rng, rng.randint(1, 40)), random_type(rng, rng.randint(1, 40)))
             for _ in range(10_000)]
    too_big = sum(type_size(a) > 40 or type_size(b) > 40 for a, b in pairs)
    decider = Decider()
    start = time.perf_counter()
    errors = 0
    for a, b in pairs:
        try:
            decider.subtype(a, b)
        except Exception:
            errors += 1
    elapsed = time.perf_counter() - start
    ok = not too_big and not errors and elapsed < 60
    return _result(ok, f"10000 pairs decided, {errors} errors, {elapsed:.2f}s")


@lru_cache(maxsize=None)
def criterion_5():
    start = time.perf_counter()
    den = denotation(DEFAULT_UNIVERSE)
    rng = rng_of(5)
    pairs = []
    while len(pairs) < 500:
        a = random_type(rng, rng.randint(1, 8), testable=True)
        b = random_type(rng, rng.randint(1, 8), testable=True)
        if subtype(a, b):
            pairs.append((a, b))
    bad = [(a, b) for a, b in pairs if den.counterexamples(a, b)]
    broken = 0
    for _ in range(200):
        a = random_type(rng, rng.randint(1, 10), testable=True)
        pos, neg = den.of(a), den.of(Comp(a))
        if (pos & neg).any() or not (pos | neg).all():
            broken += 1
    elapsed = time.perf_counter() - start
    ok = not bad and not broken and elapsed < 60 and DEFAULT_UNIVERSE == NfUniverse(3, ("a", "b", "give"), (0, 1))
    return _result(ok, f"500 true pairs, {len(bad)} with counterexamples among {len(den)} normal forms; "
                       f"partition broken for {broken}/200; {elapsed:.2f}s")


@lru_cache(maxsize=None)
def criterion_6():
    start = time.perf_counter()
    rng = rng_of(6)
    problems = {"derive": 0, "tag": 0, "check": 0, "violated": 0}
    for _ in range(1000):
        t = random_normal_form(rng, 5)
        try:
            tag, d = two.classify_and_derive(t)
        except Exception:
            problems["derive"] += 1
            continue
        if tag != classify_nf(t):
            problems["tag"] += 1
        if not two.check(d).ok:
            problems["check"] += 1
        if two.dynamic_soundness_check(d) == "violated":
            problems["violated"] += 1
    elapsed = time.perf_counter() - start
    ok = not any(problems.values()) and elapsed < 120
    return _result(ok, f"1000 normal forms, failures {problems}, {elapsed:.2f}s")


@lru_cache(maxsize=None)
def criterion_7():
    rng = rng_of(7)
    failures, live = 0, 0
    for i in range(2000):
        if i % 2:
            a, b, c = (random_type(rng, rng.randint(1, 6)) for _ in range(3))
        else:
            # chains that hold by construction of meets and joins
            x, y, z = (random_type(rng, rng.randint(1, 5)) for _ in range(3))
            a, b, c = meet([x, y]), x, Union((x, z))
            if rng.random() < 0.5:
                a, b, c = Comp(c), Comp(b), Comp(a)
        if subtype(a, b) and subtype(b, c):
            live += 1
            if not subtype(a, c):
                failures += 1
    bad_inv = 0
    for _ in range(1000):
        a = random_type(rng, rng.randint(1, 14))
        if not type_equiv(Comp(Comp(a)), a):
            bad_inv += 1
    ok = not failures and not bad_inv and live >= 1000
    return _result(ok, f"transitivity: {failures} failures over {live} live triples of 2000; "
                       f"involution: {bad_inv} failures of 1000")


@lru_cache(maxsize=None)
def criterion_8():
    failures = []
    two_sided, one_sided = accepted("two-sided"), accepted("one-sided")
    for name, sc in two_sided:
        e = two.elaborate(sc.derivation)
        t = one.translate_two_to_one(e)
        want = seq([], one.negate(e.conclusion.left) | e.conclusion.right)
        if t.conclusion != want or not one.check_one_sided(t).ok:
            failures.append(name)
    for name, sc in one_sided:
        t = one.translate_one_to_two(sc.derivation)
        if not two.check(two.elaborate(t)).ok:
            failures.append(name)
    return _result(not failures, f"{len(two_sided)} two-sided and {len(one_sided)} one-sided "
                                 f"derivations, failures: {failures or 'none'}")


@lru_cache(maxsize=None)
def criterion_9():
    total, false_accepts, no_path = 0, 0, 0
    for name, sc in scripts():
        if sc.expect != "accept":
            continue
        for path, m in mutants(sc.system, sc.derivation):
            total += 1
            ok, where = diagnose(sc.system, m)
            if ok:
                false_accepts += 1
            elif where is None:
                no_path += 1
    ok = total >= 100 and not false_accepts and not no_path
    return _result(ok, f"{total} mutants, {false_accepts} false accepts, {no_path} without a path")


@lru_cache(maxsize=None)
def criterion_10():
    parts = {k: f()[0] for k, f in ((1, criterion_1), (5, criterion_5), (6, criterion_6))}
    violated, checked = [], 0
    for name, sc in accepted("two-sided"):
        status = dynamic_status(sc, Verdict(True, elaborated=two.elaborate(sc.derivation)))
        checked += status != "-"
        if status == "violated":
            violated.append(name)
    ok = all(parts.values()) and not violated
    return _result(ok, f"criteria 1, 5, 6 {'hold' if all(parts.values()) else 'fail'}; "
                       f"{checked} corpus derivations run, violated: {violated or 'none'}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [f() for f in CRITERIA]
    for k, (ok, detail) in enumerate(results, 1):
        print(line(k, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
