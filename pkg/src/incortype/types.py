"""The type language, abbreviations and pattern types."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .syntax import PAtom, PVar, Pattern, pattern_vars


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class OkT:
    pass


@dataclass(frozen=True)
class AtomsT:
    pass


@dataclass(frozen=True)
class IntT:
    pass


@dataclass(frozen=True)
class AtomLit:
    name: str


@dataclass(frozen=True)
class PairT:
    fst: "Type"
    snd: "Type"


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Union:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("a union needs at least one member")


@dataclass(frozen=True)
class Comp:
    inner: "Type"


Type = "Top | OkT | AtomsT | IntT | AtomLit | PairT | Arrow | Union | Comp"

TOP = Top()
OK = OkT()
ATOMS = AtomsT()
INT = IntT()
BOT = Comp(TOP)
PAIR = PairT(TOP, TOP)
PAIRVAL = PairT(OK, OK)
FUN = Arrow(Comp(TOP), TOP)
BOOL = Union((AtomLit("true"), AtomLit("false")))


class DomainMismatchError(ValueError):
    pass


def onlyto(a, b) -> Arrow:
    return Arrow(Comp(a), Comp(b))


def coto(a, b) -> Comp:
    return Comp(onlyto(a, b))


def meet(types: Sequence) -> Comp:
    return Comp(Union(tuple(Comp(t) for t in types)))


def union_of(types: Sequence):
    """A union, collapsing the one-member case to the member itself."""
    types = tuple(types)
    return types[0] if len(types) == 1 else Union(types)


_NAMED = {"Bot": BOT, "Pair": PAIR, "PairVal": PAIRVAL, "Fun": FUN, "Bool": BOOL}


def expand_abbrev(name: str, *args):
    if name in _NAMED:
        return _NAMED[name]
    if name == "onlyto":
        return onlyto(*args)
    if name == "coto":
        return coto(*args)
    if name == "meet":
        (types,) = args
        return meet(types)
    raise KeyError(f"unknown abbreviation {name!r}")


def instantiate_pattern(p: Pattern, theta: Mapping):
    if set(theta) != set(pattern_vars(p)):
        raise DomainMismatchError(
            f"substitution domain {sorted(theta)} differs from pattern variables {pattern_vars(p)}")
    return _inst(p, theta)


def _inst(p, theta):
    if isinstance(p, PVar):
        return theta[p.name]
    if isinstance(p, PAtom):
        return AtomLit(p.name)
    return PairT(_inst(p.fst, theta), _inst(p.snd, theta))


def theta_ok(p: Pattern) -> dict:
    return {x: OK for x in pattern_vars(p)}


# Canonical form: unions flattened, deduplicated and sorted

_TAGS = {Top: 0, OkT: 1, AtomsT: 2, IntT: 3, AtomLit: 4, PairT: 5, Arrow: 6, Union: 7, Comp: 8}


def type_key(t) -> tuple:
    if isinstance(t, AtomLit):
        return (4, t.name)
    if isinstance(t, (PairT, Arrow)):
        a, b = (t.fst, t.snd) if isinstance(t, PairT) else (t.dom, t.cod)
        return (_TAGS[type(t)], type_key(a), type_key(b))
    if isinstance(t, Union):
        return (7, tuple(type_key(m) for m in t.members))
    if isinstance(t, Comp):
        return (8, type_key(t.inner))
    return (_TAGS[type(t)],)


@lru_cache(maxsize=200_000)
def canonical(t):
    if isinstance(t, PairT):
        return PairT(canonical(t.fst), canonical(t.snd))
    if isinstance(t, Arrow):
        return Arrow(canonical(t.dom), canonical(t.cod))
    if isinstance(t, Comp):
        return Comp(canonical(t.inner))
    if isinstance(t, Union):
        flat = {}
        for m in t.members:
            m = canonical(m)
            parts = m.members if isinstance(m, Union) else (m,)
            for q in parts:
                flat[type_key(q)] = q
        members = [flat[k] for k in sorted(flat)]
        return union_of(members)
    return t


def type_size(t) -> int:
    if isinstance(t, PairT):
        return 1 + type_size(t.fst) + type_size(t.snd)
    if isinstance(t, Arrow):
        return 1 + type_size(t.dom) + type_size(t.cod)
    if isinstance(t, Union):
        return 1 + sum(type_size(m) for m in t.members)
    if isinstance(t, Comp):
        return 1 + type_size(t.inner)
    return 1


def subexpressions(t) -> set:
    out = {t}
    if isinstance(t, PairT):
        out |= subexpressions(t.fst) | subexpressions(t.snd)
    elif isinstance(t, Arrow):
        out |= subexpressions(t.dom) | subexpressions(t.cod)
    elif isinstance(t, Union):
        for m in t.members:
            out |= subexpressions(m)
    elif isinstance(t, Comp):
        out |= subexpressions(t.inner)
    return out


# Printing, re-sugaring abbreviations where the shape is exact

_BASE_NAMES = {Top: "Top", OkT: "Ok", AtomsT: "Atoms", IntT: "Int"}


def show_type(t) -> str:
    return _show(t, 0)


# levels: 0 arrows, 1 unions, 2 meets, 3 prefix and atomic
def _show(t, level: int) -> str:
    if type(t) in _BASE_NAMES:
        return _BASE_NAMES[type(t)]
    if t == BOT:
        return "Bot"
    if t == PAIR:
        return "Pair"
    if t == PAIRVAL:
        return "PairVal"
    if t == FUN:
        return "Fun"
    if t == BOOL:
        return "Bool"
    if isinstance(t, AtomLit):
        return "'" + t.name
    if isinstance(t, PairT):
        return f"({_show(t.fst, 0)}, {_show(t.snd, 0)})"
    if isinstance(t, Comp) and isinstance(t.inner, Arrow) and _is_onlyto(t.inner):
        s = f"{_show(t.inner.dom.inner, 1)} coto {_show(t.inner.cod.inner, 0)}"
        return s if level == 0 else f"({s})"
    if isinstance(t, Arrow):
        if _is_onlyto(t):
            s = f"{_show(t.dom.inner, 1)} onlyto {_show(t.cod.inner, 0)}"
        else:
            s = f"{_show(t.dom, 1)} -> {_show(t.cod, 0)}"
        return s if level == 0 else f"({s})"
    if isinstance(t, Comp) and _is_meet(t):
        s = " /\\ ".join(_show(m.inner, 3) for m in t.inner.members)
        return s if level <= 2 else f"({s})"
    if isinstance(t, Comp):
        return "~" + _show(t.inner, 3)
    if isinstance(t, Union):
        if len(t.members) == 1:
            return _show(t.members[0], level)
        s = " \\/ ".join(_show(m, 2) for m in t.members)
        return s if level <= 1 else f"({s})"
    raise TypeError(f"not a type: {t!r}")


def _is_onlyto(t: Arrow) -> bool:
    return isinstance(t.dom, Comp) and isinstance(t.cod, Comp) and t.dom != BOT


def _is_meet(t: Comp) -> bool:
    u = t.inner
    return (isinstance(u, Union) and len(u.members) >= 2
            and all(isinstance(m, Comp) for m in u.members))
