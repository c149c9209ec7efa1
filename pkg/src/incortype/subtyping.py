"""Subtype decision by cycle-avoiding search over the alternative rules,
plus a checker for derivations in the original rule set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .types import (
    ATOMS, BOT, FUN, INT, OK, PAIR, PAIRVAL, TOP, Arrow, AtomLit, AtomsT, Comp,
    IntT, OkT, PairT, Top, Union, canonical, subexpressions, show_type,
)

BASES = (INT, PAIRVAL, FUN, ATOMS)
_DISJ_BASES = (INT, PAIR, FUN, ATOMS)


def disjoint(a, b) -> bool:
    if a == b:
        return False
    if isinstance(a, AtomLit) and isinstance(b, AtomLit):
        return True
    return a in _DISJ_BASES and b in _DISJ_BASES


@dataclass(frozen=True)
class AltDerivation:
    rule: str
    lhs: object
    rhs: object
    premises: tuple = ()

    def rules_used(self) -> set:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules_used()
        return out


def _instances(a, b):
    """Rule instances with conclusion a <= b, as (rule, premise goals)."""
    # axioms
    if a == b:
        yield "Refl", ()
    if isinstance(b, Top):
        yield "Top", ()
    if isinstance(a, AtomLit) and isinstance(b, AtomsT):
        yield "Atom", ()
    if isinstance(a, AtomLit) and isinstance(b, Comp) and isinstance(b.inner, AtomLit) \
            and a.name != b.inner.name:
        yield "CompRAtom1", ()
    if a == Comp(ATOMS) and isinstance(b, Comp) and isinstance(b.inner, AtomLit):
        yield "CompLAtoms", ()
    if a == BOT:
        yield "CompLTop", ()
    # structural rules
    if isinstance(a, PairT) and isinstance(b, PairT):
        yield "Pair", ((a.fst, b.fst), (a.snd, b.snd))
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        yield "Fun", ((b.dom, a.dom), (a.cod, b.cod))
    if isinstance(a, Union):
        yield "UnionL", tuple((m, b) for m in a.members)
    if isinstance(b, Comp):
        c = b.inner
        if isinstance(a, PairT) and isinstance(c, PairT):
            yield "CompRPairL", ((a.fst, Comp(c.fst)),)
            yield "CompRPairR", ((a.fst, OK), (a.snd, Comp(c.snd)))
            # mirror image of CompRPairR, needed for complement to reverse the order
            yield "CompRPairRSym", ((c.fst, OK), (c.snd, Comp(a.snd)))
        if isinstance(c, Union):
            yield "CompRUn", tuple((a, Comp(m)) for m in c.members)
        if isinstance(c, Comp):
            yield "CompRC", ((a, c.inner),)
    if isinstance(a, Comp):
        c = a.inner
        if isinstance(b, Comp) and isinstance(c, PairT) and isinstance(b.inner, PairT):
            d = b.inner
            yield "CompLPair", ((Comp(c.fst), Comp(d.fst)), (Comp(c.snd), Comp(d.snd)))
        if isinstance(b, Comp) and isinstance(c, Arrow) and isinstance(b.inner, Arrow):
            d = b.inner
            yield "CompLArr", ((Comp(d.dom), Comp(c.dom)), (Comp(c.cod), Comp(d.cod)))
        if isinstance(c, Comp):
            yield "CompLC", ((c.inner, b),)
    # rules with a choice of witness
    if isinstance(b, OkT):
        for d in BASES:
            yield "OkR", ((a, d),)
    if isinstance(b, Comp):
        c = b.inner
        if isinstance(c, AtomLit):
            for d in (INT, PAIR, FUN):
                yield "CompRAtom2", ((a, d),)
        if isinstance(c, IntT):
            for d in (PAIR, FUN, ATOMS):
                yield "CompRInt", ((a, d),)
        if isinstance(c, PairT):
            for d in (INT, FUN, ATOMS):
                yield "CompRPair", ((a, d),)
        if isinstance(c, Arrow):
            for d in (INT, PAIR, ATOMS):
                yield "CompRArr", ((a, d),)
        if isinstance(c, AtomsT):
            for d in (INT, PAIR, FUN):
                yield "CompRAtoms", ((a, d),)
    if isinstance(b, Union):
        for m in b.members:
            yield "UnionR", ((a, m),)
    if a == Comp(OK):
        for d in BASES:
            yield "CompLOk", ((Comp(d), b),)
    if isinstance(a, Comp) and isinstance(a.inner, Union):
        for m in a.inner.members:
            yield "CompLUn", ((Comp(m), b),)


_INF = float("inf")


class _Search:
    """Depth first search with a branch-local stack of open goals.

    Successes are always cached.  A failure is cached only when it did not
    rely on cutting a cycle at a goal that is still open further down the
    stack, since such a failure may be reversed once that goal resolves."""

    def __init__(self):
        self.proved = {}
        self.refuted = set()
        self.open = {}

    def goal(self, a, b):
        key = (a, b)
        if key in self.proved:
            return self.proved[key], _INF
        if key in self.refuted:
            return None, _INF
        if key in self.open:
            return None, self.open[key]
        depth = len(self.open)
        self.open[key] = depth
        low = _INF
        result = None
        for rule, premises in _instances(a, b):
            subs = []
            for pa, pb in premises:
                d, l = self.goal(pa, pb)
                if d is None:
                    low = min(low, l)
                    break
                subs.append(d)
            else:
                result = AltDerivation(rule, a, b, tuple(subs))
                break
        del self.open[key]
        if result is not None:
            self.proved[key] = result
            return result, _INF
        if low >= depth:
            self.refuted.add(key)
            return None, _INF
        return None, low


def prove(a, b) -> Optional[AltDerivation]:
    d, _ = _Search().goal(a, b)
    return d


class Decider:
    """A decider whose caches persist across queries."""

    def __init__(self):
        self._search = _Search()

    def prove(self, a, b):
        d, _ = self._search.goal(a, b)
        return d

    def subtype(self, a, b) -> bool:
        return self.prove(a, b) is not None


_shared = Decider()
_SHARED_LIMIT = 500_000


def subtype(a, b) -> bool:
    global _shared
    s = _shared._search
    if len(s.proved) + len(s.refuted) > _SHARED_LIMIT:
        _shared = Decider()
    return _shared.subtype(a, b)


def type_equiv(a, b) -> bool:
    return subtype(a, b) and subtype(b, a)


def universe(a, b) -> set:
    base = subexpressions(a) | subexpressions(b) | {TOP, INT, PAIR, PAIRVAL, FUN, ATOMS, OK}
    return base | {Comp(d) for d in base}


# Original rule set, checked but never searched

LEGACY_RULES = {
    "Refl": 0, "Top": 0, "Ok": 0, "Disj": 0, "Atom": 0, "PairC": 0,
    "Pair": 2, "Fun": 2, "UnionL": None, "UnionR": 1, "CompL": 1, "CompR": 1,
    "Trans": 2,
}


class MalformedDerivationError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"at node {'/'.join(map(str, path)) or 'root'}: {message}")
        self.path = tuple(path)


@dataclass(frozen=True)
class SubDerivation:
    rule: str
    lhs: object
    rhs: object
    premises: tuple = ()
    witness: object = None


def _same(a, b) -> bool:
    return canonical(a) == canonical(b)


_OK_UNION = canonical(Union((INT, PAIRVAL, FUN, ATOMS)))


def check_legacy_subderivation(d: SubDerivation, path=()) -> bool:
    return _legacy(d, tuple(path))


def legacy_failure(d: SubDerivation, path=()):
    """The path of the first invalid node, or None when d is valid."""
    if d.rule not in LEGACY_RULES:
        raise MalformedDerivationError(path, f"unknown rule {d.rule!r}")
    arity = LEGACY_RULES[d.rule]
    if d.rule == "UnionL":
        arity = len(d.lhs.members) if isinstance(d.lhs, Union) else None
        if arity is None:
            return path
    if len(d.premises) != arity:
        raise MalformedDerivationError(path, f"{d.rule} expects {arity} premises, got {len(d.premises)}")
    if d.rule in ("Trans", "UnionR") and d.witness is None:
        raise MalformedDerivationError(path, f"{d.rule} needs a witness")
    if not _legacy_node(d):
        return path
    for i, p in enumerate(d.premises):
        bad = legacy_failure(p, path + (i,))
        if bad is not None:
            return bad
    return None


def _legacy(d, path) -> bool:
    return legacy_failure(d, path) is None


def _concl(p) -> tuple:
    return p.lhs, p.rhs


def _legacy_node(d: SubDerivation) -> bool:
    a, b, ps = d.lhs, d.rhs, d.premises
    r = d.rule
    if r == "Refl":
        return _same(a, b)
    if r == "Top":
        return isinstance(b, Top)
    if r == "Ok":
        return canonical(a) == _OK_UNION and isinstance(b, OkT)
    if r == "Disj":
        return isinstance(b, Comp) and disjoint(canonical(a), canonical(b.inner))
    if r == "Atom":
        return isinstance(a, AtomLit) and isinstance(b, AtomsT)
    if r == "PairC":
        if not (isinstance(b, Comp) and isinstance(b.inner, PairT)):
            return False
        x, y = b.inner.fst, b.inner.snd
        want = Union((PairT(Comp(x), TOP), PairT(OK, Comp(y))))
        return _same(a, want)
    if r == "Pair":
        if not (isinstance(a, PairT) and isinstance(b, PairT)):
            return False
        return _pair_premises(ps, [(a.fst, b.fst), (a.snd, b.snd)])
    if r == "Fun":
        if not (isinstance(a, Arrow) and isinstance(b, Arrow)):
            return False
        return _pair_premises(ps, [(b.dom, a.dom), (a.cod, b.cod)])
    if r == "UnionL":
        return _pair_premises(ps, [(m, b) for m in a.members])
    if r == "UnionR":
        j = d.witness
        if not (isinstance(b, Union) and isinstance(j, int) and 1 <= j <= len(b.members)):
            return False
        return _pair_premises(ps, [(a, b.members[j - 1])])
    if r == "CompL":
        if not isinstance(a, Comp):
            return False
        return _pair_premises(ps, [(Comp(b), a.inner)])
    if r == "CompR":
        if not isinstance(b, Comp):
            return False
        return _pair_premises(ps, [(b.inner, Comp(a))])
    if r == "Trans":
        c = d.witness
        return _pair_premises(ps, [(a, c), (c, b)])
    return False


def _pair_premises(ps, goals) -> bool:
    if len(ps) != len(goals):
        return False
    return all(_same(p.lhs, x) and _same(p.rhs, y) for p, (x, y) in zip(ps, goals))


def show_goal(a, b) -> str:
    return f"{show_type(a)} <= {show_type(b)}"
