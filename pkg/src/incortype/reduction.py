"""Call-by-name reduction with strict pairs and strict matching."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Abs, App, Atom, BinOp, Fix, Match, Num, PAtom, PVar, Pair, Pattern,
    RelOp, Term, Var, apply_subst, free_vars,
)

DEFAULT_FUEL = 100_000


def default_fuel() -> int:
    raw = os.environ.get("INCORTYPE_FUEL")
    if raw:
        try:
            n = int(raw)
            if n > 0:
                return n
        except ValueError:
            pass
    return DEFAULT_FUEL


class OpenTermError(ValueError):
    pass


class NotAValueError(ValueError):
    pass


# Step results


@dataclass(frozen=True)
class Stepped:
    next: Term


@dataclass(frozen=True)
class Value:
    pass


@dataclass(frozen=True)
class Stuck:
    witness: str


# Evaluation outcomes


@dataclass(frozen=True)
class Converged:
    value: Term
    steps: int


@dataclass(frozen=True)
class WentWrong:
    stuck: Term
    steps: int


@dataclass(frozen=True)
class FuelExhausted:
    last: Term
    steps: int


def _require_closed(t: Term) -> None:
    fv = free_vars(t)
    if fv:
        raise OpenTermError(f"term has free variables {sorted(fv)}")


def _match(p: Pattern, v: Term, out: dict) -> bool:
    if isinstance(p, PVar):
        out[p.name] = v
        return True
    if isinstance(p, PAtom):
        return isinstance(v, Atom) and v.name == p.name
    if isinstance(v, Pair):
        return _match(p.fst, v.fst, out) and _match(p.snd, v.snd, out)
    return False


def match_pattern(p: Pattern, v: Term) -> Optional[dict]:
    """The substitution s with v = p s, or None."""
    if not is_value(v):
        raise NotAValueError("match_pattern needs a closed value")
    out = {}
    return out if _match(p, v, out) else None


_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}
_REL = {
    "eq": lambda a, b: a == b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


# Evaluation contexts deeper than this stop evaluation as if fuel ran out,
# since every later operation on the term would recurse this deep too.
MAX_CONTEXT_DEPTH = 400


class _TooDeep(Exception):
    pass


def _step(t: Term, depth: int = 0):
    if depth > MAX_CONTEXT_DEPTH:
        raise _TooDeep()
    if isinstance(t, (Atom, Num, Abs)):
        return Value()
    if isinstance(t, Var):
        raise OpenTermError(f"free variable {t.name}")
    if isinstance(t, Fix):
        return Stepped(apply_subst(t.body, {t.binder: t}))
    if isinstance(t, Pair):
        r = _step(t.fst, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(Pair(r.next, t.snd))
        if isinstance(r, Stuck):
            return Stuck("(S, M)")
        r = _step(t.snd, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(Pair(t.fst, r.next))
        if isinstance(r, Stuck):
            return Stuck("(V, S)")
        return Value()
    if isinstance(t, App):
        r = _step(t.fun, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(App(r.next, t.arg))
        if isinstance(t.fun, Abs):
            return Stepped(apply_subst(t.fun.body, {t.fun.binder: t.arg}))
        return Stuck("U M")
    if isinstance(t, (BinOp, RelOp)):
        sym = "op" if isinstance(t, BinOp) else "rel"
        r = _step(t.lhs, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(type(t)(t.op, r.next, t.rhs))
        if not isinstance(t.lhs, Num):
            return Stuck(f"U {sym} M")
        r = _step(t.rhs, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(type(t)(t.op, t.lhs, r.next))
        if not isinstance(t.rhs, Num):
            return Stuck(f"n {sym} U")
        a, b = t.lhs.value, t.rhs.value
        if isinstance(t, BinOp):
            return Stepped(Num(_ARITH[t.op](a, b)))
        return Stepped(Atom("true" if _REL[t.op](a, b) else "false"))
    if isinstance(t, Match):
        r = _step(t.scrutinee, depth + 1)
        if isinstance(r, Stepped):
            return Stepped(Match(r.next, t.branches))
        if isinstance(r, Stuck):
            return Stuck("match S")
        for p, n in t.branches:
            sigma = {}
            if _match(p, t.scrutinee, sigma):
                return Stepped(apply_subst(n, sigma))
        return Stuck("match V")
    raise TypeError(f"not a term: {t!r}")


def step(t: Term):
    _require_closed(t)
    try:
        return _step(t)
    except _TooDeep:
        raise ValueError(f"evaluation context deeper than {MAX_CONTEXT_DEPTH}") from None


def evaluate(t: Term, fuel: Optional[int] = None):
    _require_closed(t)
    if fuel is None:
        fuel = default_fuel()
    steps = 0
    while True:
        try:
            r = _step(t)
        except _TooDeep:
            return FuelExhausted(t, steps)
        if isinstance(r, Value):
            return Converged(t, steps)
        if isinstance(r, Stuck):
            return WentWrong(t, steps)
        if steps >= fuel:
            return FuelExhausted(t, steps)
        t = r.next
        steps += 1


eval = evaluate  # noqa: A001 - the operation is called eval


# Grammar based classification, independent of step


def is_value(t: Term) -> bool:
    if isinstance(t, (Atom, Num)):
        return True
    if isinstance(t, Abs):
        return not free_vars(t)
    if isinstance(t, Pair):
        return is_value(t.fst) and is_value(t.snd)
    return False


def is_stuck(t: Term) -> bool:
    if isinstance(t, Pair):
        return is_stuck(t.fst) or (is_value(t.fst) and is_stuck(t.snd))
    if isinstance(t, (BinOp, RelOp)):
        if is_normal(t.lhs) and not isinstance(t.lhs, Num):
            return True
        return isinstance(t.lhs, Num) and is_normal(t.rhs) and not isinstance(t.rhs, Num)
    if isinstance(t, App):
        return is_normal(t.fun) and not isinstance(t.fun, Abs)
    if isinstance(t, Match):
        if is_stuck(t.scrutinee):
            return True
        if is_value(t.scrutinee):
            return all(not _match(p, t.scrutinee, {}) for p, _ in t.branches)
        return False
    return False


def is_normal(t: Term) -> bool:
    return is_value(t) or is_stuck(t)


def classify_nf(t: Term) -> str:
    _require_closed(t)
    if is_value(t):
        return "value"
    if is_stuck(t):
        return "stuck"
    return "reducible"
