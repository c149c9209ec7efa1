"""A finite, brute-force reading of the set-of-normal-forms semantics of
types, for testing the decider and the classifier on small instances."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .reduction import Converged, FuelExhausted, evaluate, is_stuck, is_value
from .syntax import (
    DIV, Abs, App, Atom, BinOp, Match, Num, PAtom, PPair, PVar, Pair, RelOp, Var,
)
from .types import (
    Arrow, AtomLit, AtomsT, Comp, IntT, OkT, PairT, Top, Union,
)


class UntestableTypeError(ValueError):
    pass


@dataclass(frozen=True)
class NfUniverse:
    """Normal forms up to a weight bound.

    Leaves weigh 0 and each constructor adds 1, so the bound plays the role
    of a depth bound while keeping the enumeration tractable."""
    depth: int = 3
    atoms: tuple = ("a", "b", "give")
    numerals: tuple = (0, 1)
    fuel: int = 200


DEFAULT_UNIVERSE = NfUniverse()

_ID = Abs("x", Var("x"))
_APPLY_ZERO = Abs("x", App(Num(0), Var("x")))
_STUCK_MATCH_ARMS = ((PAtom("give"), Num(0)), (PPair(PVar("x"), PVar("y")), Var("x")))


def _tails():
    # non-normal second components for stuck pairs; each converges into
    # the universe or diverges
    return [DIV, App(_ID, Num(0))]


def _layers(u: NfUniverse):
    """List of (values, stuck) per weight."""
    values = [[Atom(a) for a in u.atoms] + [Num(n) for n in u.numerals]]
    stuck = [[]]
    zero = Num(0)
    for d in range(1, u.depth + 1):
        vs, ss = [], []
        if d == 1:
            vs.append(_ID)
        if d == 2:
            vs.append(_APPLY_ZERO)
        for k in range(d):
            for a in values[k]:
                for b in values[d - 1 - k]:
                    vs.append(Pair(a, b))
                for b in stuck[d - 1 - k]:
                    ss.append(Pair(a, b))
            for a in stuck[k]:
                rest = values[d - 1 - k] + stuck[d - 1 - k]
                if d - 1 - k == 0:
                    rest = rest + _tails()
                for b in rest:
                    ss.append(Pair(a, b))
        for x in values[d - 1] + stuck[d - 1]:
            if not isinstance(x, Num):
                ss.append(BinOp("add", x, zero))
                ss.append(BinOp("add", zero, x))
                ss.append(RelOp("lt", x, zero))
            if not isinstance(x, Abs):
                ss.append(App(x, zero))
                ss.append(App(x, _ID))
            if is_stuck(x) or not (x == Atom("give") or isinstance(x, Pair)):
                ss.append(Match(x, _STUCK_MATCH_ARMS))
        values.append(vs)
        stuck.append(ss)
    return values, stuck


def enum_normal_forms(u: NfUniverse = DEFAULT_UNIVERSE) -> Iterator:
    values, stuck = _layers(u)
    for vs, ss in zip(values, stuck):
        yield from vs
        yield from ss


# Reference membership, following the semantic equations directly


def _testable_arrow(a: Arrow) -> None:
    if not isinstance(a.cod, Top):
        raise UntestableTypeError("only arrows with codomain Top can be tested")


def member_nf(u, a, fuel: int = DEFAULT_UNIVERSE.fuel) -> bool:
    if isinstance(a, Top):
        return True
    if isinstance(a, OkT):
        return is_value(u)
    if isinstance(a, AtomsT):
        return isinstance(u, Atom)
    if isinstance(a, IntT):
        return isinstance(u, Num)
    if isinstance(a, AtomLit):
        return isinstance(u, Atom) and u.name == a.name
    if isinstance(a, Arrow):
        _testable_arrow(a)
        return isinstance(u, Abs)
    if isinstance(a, Union):
        return any(member_nf(u, m, fuel) for m in a.members)
    if isinstance(a, Comp):
        return not member_nf(u, a.inner, fuel)
    if isinstance(a, PairT):
        if not isinstance(u, Pair):
            return False
        if is_value(u.fst):
            return member_nf(u.fst, a.fst, fuel) and member_nf(u.snd, a.snd, fuel)
        if not member_nf(u.fst, a.fst, fuel):
            return False
        return member_term(u.snd, a.snd, fuel) != "no"
    raise TypeError(f"not a type: {a!r}")


def member_term(m, a, fuel: int = DEFAULT_UNIVERSE.fuel) -> str:
    r = evaluate(m, fuel)
    if isinstance(r, FuelExhausted):
        return "unknown"
    nf = r.value if isinstance(r, Converged) else r.stuck
    return "yes" if member_nf(nf, a, fuel) else "no"


def is_testable(a) -> bool:
    if isinstance(a, Arrow):
        return isinstance(a.cod, Top) and is_testable(a.dom)
    if isinstance(a, (PairT,)):
        return is_testable(a.fst) and is_testable(a.snd)
    if isinstance(a, Union):
        return all(is_testable(m) for m in a.members)
    if isinstance(a, Comp):
        return is_testable(a.inner)
    return True


# Vectorised membership over an indexed universe


class Denotation:
    """Boolean membership vectors for types over a fixed list of normal forms."""

    def __init__(self, u: NfUniverse = DEFAULT_UNIVERSE):
        self.universe = u
        self.terms = list(enum_normal_forms(u))
        index = {t: i for i, t in enumerate(self.terms)}
        n = len(self.terms)
        self.is_value = np.array([is_value(t) for t in self.terms])
        self.is_num = np.array([isinstance(t, Num) for t in self.terms])
        self.is_atom = np.array([isinstance(t, Atom) for t in self.terms])
        self.is_abs = np.array([isinstance(t, Abs) for t in self.terms])
        self.atom_masks = {a: np.array([t == Atom(a) for t in self.terms]) for a in u.atoms}
        pairs = [i for i, t in enumerate(self.terms) if isinstance(t, Pair)]
        self.pair_idx = np.array(pairs, dtype=int)
        fst, snd, fst_val = [], [], []
        for i in pairs:
            t = self.terms[i]
            fst.append(index[t.fst])
            fst_val.append(is_value(t.fst))
            if t.snd in index:
                snd.append(index[t.snd])
            else:
                r = evaluate(t.snd, u.fuel)
                if isinstance(r, FuelExhausted):
                    snd.append(-1)
                else:
                    nf = r.value if isinstance(r, Converged) else r.stuck
                    snd.append(index[nf])
        self.pair_fst = np.array(fst, dtype=int)
        self.pair_snd = np.array(snd, dtype=int)
        self.pair_fst_value = np.array(fst_val, dtype=bool)
        self._n = n
        self._cache = {}

    def __len__(self):
        return self._n

    def of(self, a) -> np.ndarray:
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        out = self._compute(a)
        out.flags.writeable = False
        self._cache[a] = out
        return out

    def _compute(self, a) -> np.ndarray:
        n = self._n
        if isinstance(a, Top):
            return np.ones(n, dtype=bool)
        if isinstance(a, OkT):
            return self.is_value.copy()
        if isinstance(a, AtomsT):
            return self.is_atom.copy()
        if isinstance(a, IntT):
            return self.is_num.copy()
        if isinstance(a, AtomLit):
            mask = self.atom_masks.get(a.name)
            return mask.copy() if mask is not None else np.zeros(n, dtype=bool)
        if isinstance(a, Arrow):
            _testable_arrow(a)
            return self.is_abs.copy()
        if isinstance(a, Union):
            out = np.zeros(n, dtype=bool)
            for m in a.members:
                out |= self.of(m)
            return out
        if isinstance(a, Comp):
            return ~self.of(a.inner)
        if isinstance(a, PairT):
            da, db = self.of(a.fst), self.of(a.snd)
            snd_ok = np.where(self.pair_snd >= 0, db[np.maximum(self.pair_snd, 0)], True)
            snd_val = db[np.maximum(self.pair_snd, 0)]
            fst_in = da[self.pair_fst]
            ok = np.where(self.pair_fst_value, fst_in & snd_val, fst_in & snd_ok)
            out = np.zeros(n, dtype=bool)
            out[self.pair_idx] = ok
            return out
        raise TypeError(f"not a type: {a!r}")

    def counterexamples(self, a, b) -> list:
        """Enumerated normal forms in a but not in b."""
        bad = self.of(a) & ~self.of(b)
        return [self.terms[i] for i in np.flatnonzero(bad)]


@lru_cache(maxsize=4)
def denotation(u: NfUniverse = DEFAULT_UNIVERSE) -> Denotation:
    return Denotation(u)
