"""Terms and patterns of the core language, with binding and substitution."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union as _U

BIN_OPS = ("add", "sub", "mul")
REL_OPS = ("eq", "lt", "le", "gt", "ge")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


class SyntaxErrorBase(ValueError):
    pass


class LinearityError(SyntaxErrorBase):
    pass


class DisjointnessError(SyntaxErrorBase):
    pass


class IdentifierError(SyntaxErrorBase):
    pass


def _check_ident(name: str) -> None:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise IdentifierError(f"bad identifier {name!r}")


# Patterns


@dataclass(frozen=True)
class PVar:
    name: str

    def __post_init__(self):
        _check_ident(self.name)


@dataclass(frozen=True)
class PAtom:
    name: str


@dataclass(frozen=True)
class PPair:
    fst: "Pattern"
    snd: "Pattern"


Pattern = _U[PVar, PAtom, PPair]


def pattern_vars(p: Pattern) -> list:
    """Variables of p in left-to-right order (duplicates kept)."""
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PPair):
        return pattern_vars(p.fst) + pattern_vars(p.snd)
    return []


def is_linear(p: Pattern) -> bool:
    names = pattern_vars(p)
    return len(names) == len(set(names))


def patterns_disjoint(p: Pattern, q: Pattern) -> bool:
    """True iff no term matches both p and q."""
    if isinstance(p, PVar) or isinstance(q, PVar):
        return False
    if isinstance(p, PAtom) and isinstance(q, PAtom):
        return p.name != q.name
    if isinstance(p, PPair) and isinstance(q, PPair):
        return patterns_disjoint(p.fst, q.fst) or patterns_disjoint(p.snd, q.snd)
    return True


def rename_pattern(p: Pattern, ren: Mapping[str, str]) -> Pattern:
    if isinstance(p, PVar):
        return PVar(ren.get(p.name, p.name))
    if isinstance(p, PPair):
        return PPair(rename_pattern(p.fst, ren), rename_pattern(p.snd, ren))
    return p


# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        _check_ident(self.name)


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Pair:
    fst: "Term"
    snd: "Term"


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "Term"

    def __post_init__(self):
        _check_ident(self.binder)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Fix:
    binder: str
    body: "Term"

    def __post_init__(self):
        _check_ident(self.binder)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Term"
    rhs: "Term"

    def __post_init__(self):
        if self.op not in BIN_OPS:
            raise ValueError(f"unknown binary operation {self.op!r}")


@dataclass(frozen=True)
class RelOp:
    op: str
    lhs: "Term"
    rhs: "Term"

    def __post_init__(self):
        if self.op not in REL_OPS:
            raise ValueError(f"unknown relation {self.op!r}")


@dataclass(frozen=True)
class Match:
    scrutinee: "Term"
    branches: tuple

    def __post_init__(self):
        branches = tuple((p, n) for p, n in self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ValueError("match needs at least one branch")
        for p, _ in branches:
            if not is_linear(p):
                raise LinearityError(f"pattern is not linear: {pattern_vars(p)}")
        for i, (p, _) in enumerate(branches):
            for q, _ in branches[i + 1:]:
                if not patterns_disjoint(p, q):
                    raise DisjointnessError(f"patterns overlap: {p} and {q}")


Term = _U[Var, Atom, Num, Pair, Abs, App, Fix, BinOp, RelOp, Match]


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, (Atom, Num)):
        return frozenset()
    if isinstance(t, (Pair,)):
        return free_vars(t.fst) | free_vars(t.snd)
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, (BinOp, RelOp)):
        return free_vars(t.lhs) | free_vars(t.rhs)
    if isinstance(t, (Abs, Fix)):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, Match):
        out = set(free_vars(t.scrutinee))
        for p, n in t.branches:
            out |= free_vars(n) - set(pattern_vars(p))
        return frozenset(out)
    raise TypeError(f"not a term: {t!r}")


def all_vars(t: Term) -> set:
    """Every identifier occurring in t, bound or free."""
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (Atom, Num)):
        return set()
    if isinstance(t, Pair):
        return all_vars(t.fst) | all_vars(t.snd)
    if isinstance(t, App):
        return all_vars(t.fun) | all_vars(t.arg)
    if isinstance(t, (BinOp, RelOp)):
        return all_vars(t.lhs) | all_vars(t.rhs)
    if isinstance(t, (Abs, Fix)):
        return all_vars(t.body) | {t.binder}
    if isinstance(t, Match):
        out = all_vars(t.scrutinee)
        for p, n in t.branches:
            out |= all_vars(n) | set(pattern_vars(p))
        return out
    raise TypeError(f"not a term: {t!r}")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """base followed by the fewest primes that avoid every name in avoid."""
    avoid = set(avoid)
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def apply_subst(t: Term, s: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    s = {k: v for k, v in s.items() if k in free_vars(t)}
    if not s:
        return t
    return _subst(t, s)


def _range_fv(s: Mapping[str, Term]) -> set:
    out = set()
    for v in s.values():
        out |= free_vars(v)
    return out


def _bind(names, body_fv, s):
    """Drop shadowed keys and pick renamings for binders that would capture."""
    s = {k: v for k, v in s.items() if k not in names and k in body_fv}
    if not s:
        return s, {}
    danger = _range_fv(s)
    ren = {}
    used = set(body_fv) | danger | set(s) | set(names)
    for x in names:
        if x in danger:
            y = fresh_name(x, used)
            used.add(y)
            ren[x] = y
    return s, ren


def _subst(t: Term, s: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, (Atom, Num)):
        return t
    if isinstance(t, Pair):
        return Pair(_subst(t.fst, s), _subst(t.snd, s))
    if isinstance(t, App):
        return App(_subst(t.fun, s), _subst(t.arg, s))
    if isinstance(t, BinOp):
        return BinOp(t.op, _subst(t.lhs, s), _subst(t.rhs, s))
    if isinstance(t, RelOp):
        return RelOp(t.op, _subst(t.lhs, s), _subst(t.rhs, s))
    if isinstance(t, (Abs, Fix)):
        inner, ren = _bind([t.binder], free_vars(t.body), s)
        if not inner:
            return t
        body = t.body
        binder = t.binder
        if ren:
            binder = ren[t.binder]
            inner = dict(inner)
            inner[t.binder] = Var(binder)
        return type(t)(binder, _subst(body, inner))
    if isinstance(t, Match):
        branches = []
        for p, n in t.branches:
            names = pattern_vars(p)
            inner, ren = _bind(names, free_vars(n), s)
            if not inner:
                branches.append((p, n))
                continue
            if ren:
                inner = dict(inner)
                for x, y in ren.items():
                    inner[x] = Var(y)
                p = rename_pattern(p, ren)
            branches.append((p, _subst(n, inner)))
        return Match(_subst(t.scrutinee, s), tuple(branches))
    raise TypeError(f"not a term: {t!r}")


def rename_free(t: Term, old: str, new: str) -> Term:
    return apply_subst(t, {old: Var(new)})


def alpha_key(t: Term, env: Optional[dict] = None, depth: int = 0):
    """A hashable key equal for exactly the alpha-equivalent terms."""
    env = env or {}
    if isinstance(t, Var):
        if t.name in env:
            return ("b", depth - env[t.name])
        return ("f", t.name)
    if isinstance(t, Atom):
        return ("a", t.name)
    if isinstance(t, Num):
        return ("n", t.value)
    if isinstance(t, Pair):
        return ("p", alpha_key(t.fst, env, depth), alpha_key(t.snd, env, depth))
    if isinstance(t, App):
        return ("@", alpha_key(t.fun, env, depth), alpha_key(t.arg, env, depth))
    if isinstance(t, BinOp):
        return ("op", t.op, alpha_key(t.lhs, env, depth), alpha_key(t.rhs, env, depth))
    if isinstance(t, RelOp):
        return ("rel", t.op, alpha_key(t.lhs, env, depth), alpha_key(t.rhs, env, depth))
    if isinstance(t, (Abs, Fix)):
        inner = dict(env)
        inner[t.binder] = depth + 1
        tag = "lam" if isinstance(t, Abs) else "fix"
        return (tag, alpha_key(t.body, inner, depth + 1))
    if isinstance(t, Match):
        branches = []
        for p, n in t.branches:
            inner = dict(env)
            d = depth
            for x in pattern_vars(p):
                d += 1
                inner[x] = d
            branches.append((_pattern_shape(p), alpha_key(n, inner, d)))
        return ("m", alpha_key(t.scrutinee, env, depth), tuple(branches))
    raise TypeError(f"not a term: {t!r}")


def _pattern_shape(p: Pattern):
    if isinstance(p, PVar):
        return "_"
    if isinstance(p, PAtom):
        return ("a", p.name)
    return (_pattern_shape(p.fst), _pattern_shape(p.snd))


def alpha_eq(a: Term, b: Term) -> bool:
    return alpha_key(a) == alpha_key(b)


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def term_size(t: Term) -> int:
    if isinstance(t, (Var, Atom, Num)):
        return 1
    if isinstance(t, Pair):
        return 1 + term_size(t.fst) + term_size(t.snd)
    if isinstance(t, App):
        return 1 + term_size(t.fun) + term_size(t.arg)
    if isinstance(t, (BinOp, RelOp)):
        return 1 + term_size(t.lhs) + term_size(t.rhs)
    if isinstance(t, (Abs, Fix)):
        return 1 + term_size(t.body)
    if isinstance(t, Match):
        return 1 + term_size(t.scrutinee) + sum(term_size(n) for _, n in t.branches)
    raise TypeError(f"not a term: {t!r}")


# Sugar recognised by the checker and the printer


def projection(m: Term, i: int, names=("x1", "x2")) -> Match:
    a, b = names
    return Match(m, ((PPair(PVar(a), PVar(b)), Var(names[i - 1])),))


def as_projection(t: Term) -> Optional[tuple]:
    """(i, M) when t is a projection pi_i(M), else None."""
    if not isinstance(t, Match) or len(t.branches) != 1:
        return None
    p, n = t.branches[0]
    if not (isinstance(p, PPair) and isinstance(p.fst, PVar) and isinstance(p.snd, PVar)):
        return None
    if n == Var(p.fst.name):
        return 1, t.scrutinee
    if n == Var(p.snd.name):
        return 2, t.scrutinee
    return None


def conditional(m: Term, n: Term, p: Term) -> Match:
    return Match(m, ((PAtom("true"), n), (PAtom("false"), p)))


def as_conditional(t: Term) -> Optional[tuple]:
    """(M, N, P) when t is if M then N else P, else None."""
    if not isinstance(t, Match) or len(t.branches) != 2:
        return None
    (p1, n1), (p2, n2) = t.branches
    if p1 == PAtom("true") and p2 == PAtom("false"):
        return t.scrutinee, n1, n2
    return None


def let_in(x: str, m: Term, n: Term) -> App:
    return App(Abs(x, n), m)


DIV = Fix("x", Var("x"))


# Printing

_BIN_SYM = {"add": "+", "sub": "-", "mul": "*"}
_REL_SYM = {"eq": "=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}


def show_pattern(p: Pattern) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PAtom):
        return "'" + p.name
    return f"({show_pattern(p.fst)}, {show_pattern(p.snd)})"


def show_term(t: Term) -> str:
    return _show(t, 0)


# precedence levels: 0 binders, 1 relations, 2 sums, 3 products, 4 application, 5 atomic
def _show(t: Term, level: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Atom):
        return "'" + t.name
    if isinstance(t, Num):
        s = str(t.value)
        return f"({s})" if t.value < 0 else s
    if isinstance(t, Pair):
        return f"({_show(t.fst, 0)}, {_show(t.snd, 0)})"
    if isinstance(t, Match):
        arms = " ".join(f"| {show_pattern(p)} -> {_show(n, 0)}" for p, n in t.branches)
        return f"match {_show(t.scrutinee, 0)} with {arms} end"
    if isinstance(t, (Abs, Fix)):
        kw = "fun" if isinstance(t, Abs) else "fix"
        s = f"{kw} {t.binder} -> {_show(t.body, 0)}"
        return s if level == 0 else f"({s})"
    if isinstance(t, App):
        s = f"{_show(t.fun, 4)} {_show(t.arg, 5)}"
        return s if level <= 4 else f"({s})"
    if isinstance(t, RelOp):
        s = f"{_show(t.lhs, 2)} {_REL_SYM[t.op]} {_show(t.rhs, 2)}"
        return s if level <= 1 else f"({s})"
    if isinstance(t, BinOp):
        if t.op == "mul":
            s = f"{_show(t.lhs, 3)} * {_show(t.rhs, 4)}"
            return s if level <= 3 else f"({s})"
        s = f"{_show(t.lhs, 2)} {_BIN_SYM[t.op]} {_show(t.rhs, 3)}"
        return s if level <= 2 else f"({s})"
    raise TypeError(f"not a term: {t!r}")
