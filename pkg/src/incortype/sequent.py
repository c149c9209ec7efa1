"""Typing formulas, sequents and derivation trees shared by both systems."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .syntax import (
    Abs, Fix, Match, Term, Var, all_vars, alpha_key, apply_subst, free_vars,
    fresh_name, pattern_vars, rename_pattern, show_term,
)
from .types import canonical, show_type


class Formula:
    """M : A, compared up to alpha-equivalence of M and canonical form of A."""

    __slots__ = ("subject", "type", "_key", "_hash")

    def __init__(self, subject: Term, type_):
        object.__setattr__(self, "subject", subject)
        object.__setattr__(self, "type", type_)
        key = (alpha_key(subject), canonical(type_))
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __eq__(self, other):
        return isinstance(other, Formula) and self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Formula({show_formula(self)})"

    def __reduce__(self):
        return (Formula, (self.subject, self.type))

    @property
    def ctype(self):
        return self._key[1]

    def free_vars(self) -> frozenset:
        return free_vars(self.subject)

    def is_var(self) -> bool:
        return isinstance(self.subject, Var)


def show_formula(f: Formula) -> str:
    return f"{show_term(f.subject)} : {show_type(f.type)}"


@dataclass(frozen=True)
class Sequent:
    left: frozenset
    right: frozenset

    def __post_init__(self):
        object.__setattr__(self, "left", frozenset(self.left))
        object.__setattr__(self, "right", frozenset(self.right))

    def free_vars(self) -> frozenset:
        out = set()
        for f in self.left | self.right:
            out |= f.free_vars()
        return frozenset(out)


def seq(left: Iterable = (), right: Iterable = ()) -> Sequent:
    return Sequent(frozenset(left), frozenset(right))


def _sort_key(f: Formula):
    return show_formula(f)


def show_side(fs) -> str:
    return "; ".join(sorted(show_formula(f) for f in fs))


def show_sequent(s: Sequent) -> str:
    left, right = show_side(s.left), show_side(s.right)
    return f"{left} |- {right}".strip()


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Sequent
    principal: Optional[Formula] = None
    witness: object = None
    premises: tuple = ()
    origin: tuple = field(default=(), compare=False, repr=False)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def rules(self) -> set:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules()
        return out

    def nodes(self, path=()):
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(path + (i,))


def show_path(path) -> str:
    return "/".join(str(i) for i in path) or "root"


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    path: tuple = ()
    rule: str = ""
    reason: str = ""
    origin: tuple = ()

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "accepted"
        where = show_path(self.path)
        if self.origin and self.origin != self.path:
            where += f" (source node {show_path(self.origin)})"
        return f"rejected at {where} [{self.rule}]: {self.reason}"


ACCEPT = CheckReport(True)


# Theta witnesses are tuples, one per branch, of sorted (name, type) pairs


def theta_of(mapping) -> tuple:
    return tuple(sorted(mapping.items()))


def theta_formulas(theta) -> list:
    return [Formula(Var(x), t) for x, t in theta]


# Binders that a node introduces into its premises


def node_binders(d: Derivation) -> set:
    p = d.principal
    if p is None:
        return set()
    t = p.subject
    if d.rule in ("Abs", "Fix") and isinstance(t, (Abs, Fix)):
        return {t.binder}
    if d.rule == "Match" and isinstance(t, Match):
        out = set()
        for q, _ in t.branches:
            out |= set(pattern_vars(q))
        return out
    return set()


def derivation_vars(d: Derivation) -> set:
    out = set()
    for _, n in d.nodes():
        for f in n.conclusion.left | n.conclusion.right:
            out |= all_vars(f.subject)
        if n.principal is not None:
            out |= all_vars(n.principal.subject)
    return out


def rename_free_in(d: Derivation, old: str, new: str) -> Derivation:
    """Rename the free variable old to the fresh name new throughout d."""
    sub = {old: Var(new)}

    def fm(f):
        return Formula(apply_subst(f.subject, sub), f.type)

    def go(n):
        concl = Sequent(frozenset(fm(f) for f in n.conclusion.left),
                        frozenset(fm(f) for f in n.conclusion.right))
        principal = fm(n.principal) if n.principal is not None else None
        if old in node_binders(n):
            return replace(n, conclusion=concl, principal=principal)
        return replace(n, conclusion=concl, principal=principal,
                       premises=tuple(go(p) for p in n.premises))

    return go(d)


def freshen_node(d: Derivation, avoid: set) -> Derivation:
    """Alpha-rename binders of this node that clash with avoid."""
    clash = node_binders(d) & set(avoid)
    if not clash:
        return d
    used = set(avoid) | derivation_vars(d)
    t = d.principal.subject
    if isinstance(t, (Abs, Fix)):
        y = fresh_name(t.binder, used)
        new_t = type(t)(y, apply_subst(t.body, {t.binder: Var(y)}))
        prem = rename_free_in(d.premises[0], t.binder, y)
        return replace(d, principal=Formula(new_t, d.principal.type), premises=(prem,))
    branches = list(t.branches)
    premises = list(d.premises)
    theta = list(d.witness)
    for i, (q, n) in enumerate(branches):
        ren = {}
        for x in pattern_vars(q):
            if x in clash:
                y = fresh_name(x, used)
                used.add(y)
                ren[x] = y
        if not ren:
            continue
        sub = {x: Var(y) for x, y in ren.items()}
        branches[i] = (rename_pattern(q, ren), apply_subst(n, sub))
        prem = premises[i + 1]
        for x, y in ren.items():
            prem = rename_free_in(prem, x, y)
        premises[i + 1] = prem
        theta[i] = tuple(sorted((ren.get(x, x), ty) for x, ty in theta[i]))
    new_t = Match(t.scrutinee, tuple(branches))
    return replace(d, principal=Formula(new_t, d.principal.type),
                   premises=tuple(premises), witness=tuple(theta))


def weaken(d: Derivation, left: Iterable = (), right: Iterable = ()) -> Derivation:
    """Thread extra formulas through every sequent of a primitive tree."""
    left, right = frozenset(left), frozenset(right)
    if not left and not right:
        return d
    avoid = set()
    for f in left | right:
        avoid |= f.free_vars()

    def go(n):
        n = freshen_node(n, avoid)
        concl = Sequent(n.conclusion.left | left, n.conclusion.right | right)
        return replace(n, conclusion=concl, premises=tuple(go(p) for p in n.premises))

    return go(d)
