"""The one-sided system, its admissible rules as derivation transformers, and
translations to and from the two-sided system."""

from __future__ import annotations

from dataclasses import replace

from .sequent import (
    ACCEPT, CheckReport, Derivation, Formula, Sequent, seq, show_formula,
    theta_formulas, weaken,
)
from .subtyping import subtype
from .syntax import App, BinOp, Match, Pair, RelOp, Var
from .types import FUN, INT, OK, Comp, canonical, show_type
from . import typing as two


class FreshnessError(ValueError):
    pass


class TranslationError(ValueError):
    def __init__(self, case, message):
        super().__init__(f"translation failed in case {case}: {message}")
        self.case = case


F = Formula
SchemaError = two.SchemaError
_want = two._want


def _comp(P, W, G, D):
    m, a = two._shape(P)
    _want(isinstance(m, Var), "Comp needs a variable subject")
    _want(isinstance(a, Comp), "Comp needs a complement type")
    return [seq(G | {F(m, a.inner)}, D)]


def _match(P, W, G, D):
    m, thetas, pts = two._match_common(P, W, G, D)
    out = [seq(G, D | {F(m.scrutinee, two.union_of(pts))})]
    for (p, n), th, pt in zip(m.branches, thetas, pts):
        out.append(seq(G | set(theta_formulas(th)), D | {F(m.scrutinee, Comp(pt)), F(n, P.type)}))
    return out


def _not_ok(P, cls, name):
    m, a = two._shape(P)
    _want(isinstance(m, cls) and a == Comp(OK), f"{name} concludes a formula of type ~Ok")
    return m


def _ope(P, W, G, D):
    m = _not_ok(P, BinOp, "OpE")
    return [seq(G, D | {F(m.lhs, Comp(INT)), F(m.rhs, Comp(INT))})]


def _relope(P, W, G, D):
    m = _not_ok(P, RelOp, "RelOpE")
    return [seq(G, D | {F(m.lhs, Comp(INT)), F(m.rhs, Comp(INT))})]


def _paire(P, W, G, D):
    m = _not_ok(P, Pair, "PairE")
    return [seq(G, D | {F(m.fst, Comp(OK)), F(m.snd, Comp(OK))})]


def _appe(P, W, G, D):
    m = _not_ok(P, App, "AppE")
    return [seq(G, D | {F(m.fun, Comp(FUN))})]


def _matche(P, W, G, D):
    m = _not_ok(P, Match, "MatchE")
    return [seq(G, D | {F(m.scrutinee, Comp(two._ok_pattern_union(m)))})]


L, R, BOTH = two.L, two.R, two.BOTH

ONE_SIDED = {
    "Var": (BOTH, two._var),
    "Top": (R, two._top),
    "Num": (R, two._num),
    "Atom": (R, two._atom),
    "Sub": (R, two._subr),
    "Comp": (R, _comp),
    "BinOp": (R, two._binop),
    "RelOp": (R, two._relop),
    "Fix": (R, two._fix),
    "Pair": (R, two._pair),
    "Abs": (R, two._abs),
    "App": (R, two._app),
    "Match": (R, _match),
    "OpE": (R, _ope),
    "RelOpE": (R, _relope),
    "PairE": (R, _paire),
    "AppE": (R, _appe),
    "MatchE": (R, _matche),
}


def _side_conditions(rule, P, W, G, D):
    bad = [f for f in G if not f.is_var()]
    if bad:
        return f"left formula {show_formula(bad[0])} is not a variable typing"
    if rule == "Sub":
        return two._side_conditions("SubR", P, W, G, D)
    if rule == "Match":
        return two._side_conditions("Match", P, W, G, D)
    return None


def check_one_sided(d: Derivation) -> CheckReport:
    stack = [(d, ())]
    while stack:
        n, p = stack.pop()
        if n.rule not in ONE_SIDED:
            return CheckReport(False, p, n.rule, f"{n.rule} is not a one-sided rule", n.origin)
        ctx, _, reason = two.match_schema(ONE_SIDED, n)
        if reason is None:
            reason = _side_conditions(n.rule, n.principal, n.witness, *ctx)
        if reason is not None:
            return CheckReport(False, p, n.rule, reason, n.origin)
        for i in reversed(range(len(n.premises))):
            stack.append((n.premises[i], p + (i,)))
    return ACCEPT


def _subset(a: Sequent, b: Sequent) -> bool:
    return a.left <= b.left and a.right <= b.right


def fit(table, rule, concl: Sequent, principal, witness, premises, case="") -> Derivation:
    """A node of the given rule whose premises are weakened to match its schema."""
    side, fn = table[rule]
    if side == BOTH:
        return Derivation(rule, concl, principal, witness, ())
    for G, D in two.contexts(side, principal, concl):
        try:
            expected = fn(principal, witness, G, D)
        except SchemaError as e:
            raise TranslationError(case or rule, str(e))
        if len(expected) == len(premises) and all(
                _subset(p.conclusion, e) for p, e in zip(premises, expected)):
            out = tuple(weaken(p, e.left - p.conclusion.left, e.right - p.conclusion.right)
                        for p, e in zip(premises, expected))
            return Derivation(rule, concl, principal, witness, out)
    raise TranslationError(case or rule, "premises do not fit the rule schema")


def _schema_context(table, d):
    ctx, _, reason = two.match_schema(table, d)
    if reason is not None:
        raise TranslationError(d.rule, reason)
    return ctx


# Admissible rules


def weak_r(d: Derivation, f: Formula) -> Derivation:
    return weaken(d, right=[f])


def weak_l_var(d: Derivation, f: Formula) -> Derivation:
    if not f.is_var():
        raise FreshnessError("only variable typings may be added on the left")
    return weaken(d, left=[f])


def subl_var(d: Derivation, x: str, old, new) -> Derivation:
    """From G, x:old |- D derive G, x:new |- D, given new <= old."""
    if not subtype(new, old):
        raise two.ElaborationError((), "SubL-var", f"{show_type(new)} is not a subtype of {show_type(old)}")
    fo, fn = F(Var(x), old), F(Var(x), new)
    if fo == fn:
        return d
    return _subl(d, fo, fn)


def _subl(d, fo, fn):
    c = d.conclusion
    if fo not in c.left:
        return d
    concl = Sequent((c.left - {fo}) | {fn}, c.right)
    if d.rule == "Var" and d.principal == fo:
        var = Derivation("Var", Sequent(concl.left, (c.right - {fo}) | {fn}), fn)
        return Derivation("Sub", concl, fo, fn.type, (var,))
    prems = []
    for p in d.premises:
        if d.rule == "Comp" and F(d.principal.subject, d.principal.type.inner) == fo:
            prems.append(weaken(p, left=[fn]))
        else:
            prems.append(_subl(p, fo, fn))
    return fit(ONE_SIDED, d.rule, concl, d.principal, d.witness, prems, "SubL-var")


def _check_fresh(left, f: Formula):
    x = f.subject
    for g in left:
        if g.subject == x and subtype(g.type, f.type):
            raise FreshnessError(f"{show_formula(g)} is on the left and {show_type(g.type)} <= {show_type(f.type)}")


def comp_l0(d: Derivation, f: Formula) -> Derivation:
    """From G |- x:A, D derive G, x:~A |- D."""
    if not isinstance(f.subject, Var):
        raise FreshnessError("CompL0 applies to variable typings only")
    if f not in d.conclusion.right:
        raise FreshnessError(f"{show_formula(f)} is not on the right")
    _check_fresh(d.conclusion.left, f)
    return _cl0(d, f)


def _cl0(d: Derivation, f: Formula) -> Derivation:
    c = d.conclusion
    nf = F(f.subject, Comp(f.type))
    if f not in c.right:
        return weaken(d, left=[nf])
    _check_fresh(c.left, f)
    concl = Sequent(c.left | {nf}, c.right - {f})
    P = d.principal
    if P == f:
        if d.rule == "Var":
            raise FreshnessError(f"{show_formula(f)} is also on the left")
        if d.rule == "Top":
            raise TranslationError("CompL0/Top", f"cannot move {show_formula(f)} to the left")
        if d.rule == "Comp":
            inner = F(f.subject, f.type.inner)
            prem = d.premises[0]
            if f in prem.conclusion.right:
                prem = _cl0(prem, f)
            out = subl_var(prem, f.subject.name, inner.type, nf.type)
            return _fit_to(out, concl, "CompL0/Comp")
        if d.rule == "Sub":
            mid = F(f.subject, d.witness)
            prem = d.premises[0]
            if mid == f:
                return _fit_to(_cl0(prem, f), concl, "CompL0/Sub")
            out = _cl0(prem, mid)
            if f in out.conclusion.right:
                out = _cl0(out, f)
            out = subl_var(out, f.subject.name, Comp(d.witness), nf.type)
            return _fit_to(out, concl, "CompL0/Sub")
        raise TranslationError("CompL0", f"{d.rule} cannot conclude a variable typing")
    if d.rule == "Comp" and P.subject == f.subject:
        ctype = canonical(P.type).inner
        if subtype(ctype, f.type):
            var = Derivation("Var", Sequent(concl.left, (concl.right - {P}) | {nf}), nf)
            return Derivation("Sub", concl, P, nf.type, (var,))
    ctx = _schema_context(ONE_SIDED, d)
    side, fn = ONE_SIDED[d.rule]
    G, D = ctx
    new_ctx = (G | {nf}, D - {f})
    expected = fn(P, d.witness, *new_ctx) if side != BOTH else []
    prems = []
    for p, e in zip(d.premises, expected):
        if f in e.right:
            prems.append(weaken(p, left=[nf]))
        else:
            prems.append(_cl0(p, f))
    return fit(ONE_SIDED, d.rule, concl, P, d.witness, prems, "CompL0")


def _fit_to(d: Derivation, concl: Sequent, case) -> Derivation:
    if d.conclusion == concl:
        return d
    if not _subset(d.conclusion, concl):
        raise TranslationError(case, "result does not fit the expected conclusion")
    return weaken(d, concl.left - d.conclusion.left, concl.right - d.conclusion.right)


def swap_l0(d: Derivation, x: str, a) -> Derivation:
    """From G |- x:~A, D derive G, x:A |- D."""
    if any(g.subject == Var(x) for g in d.conclusion.left):
        raise FreshnessError(f"{x} already has a typing on the left")
    f = F(Var(x), Comp(a))
    out = comp_l0(d, f)
    return subl_var(out, x, Comp(Comp(a)), a)


def elaborate_admissible(rule: str, d: Derivation, payload) -> Derivation:
    if rule == "WeakR":
        return weak_r(d, payload)
    if rule == "WeakL-var":
        return weak_l_var(d, payload)
    if rule == "SubL-var":
        x, old, new = payload
        return subl_var(d, x, old, new)
    if rule == "CompL0":
        return comp_l0(d, payload)
    if rule == "SwapL0":
        x, a = payload
        return swap_l0(d, x, a)
    raise two.ElaborationError((), rule, "unknown admissible rule")


# Two-sided to one-sided


def negate(fs) -> frozenset:
    return frozenset(F(f.subject, Comp(f.type)) for f in fs)


def target_of(s: Sequent) -> Sequent:
    return Sequent(frozenset(), negate(s.left) | s.right)


_SAME = {"Top", "Num", "Atom", "BinOp", "RelOp", "Pair", "App"}
_LEFT_E = {"OpE", "RelOpE", "PairE", "AppE", "MatchE"}


def translate_two_to_one(d: Derivation) -> Derivation:
    if not two.is_primitive(d):
        d = two.elaborate(d)
    return _to_one(d)


def _to_one(d: Derivation) -> Derivation:
    target = target_of(d.conclusion)
    P, W, rule = d.principal, d.witness, d.rule
    ih = [_to_one(p) for p in d.premises]
    if rule == "Var":
        nx = F(P.subject, Comp(P.type))
        var = Derivation("Var", Sequent({P}, target.right), P)
        return Derivation("Comp", target, nx, None, (var,))
    if rule in _SAME:
        return fit(ONE_SIDED, rule, target, P, W, ih)
    if rule == "SubL":
        q = F(P.subject, Comp(P.type))
        return fit(ONE_SIDED, "Sub", target, q, Comp(W), ih, "SubL")
    if rule == "SubR":
        return fit(ONE_SIDED, "Sub", target, P, W, ih, "SubR")
    if rule == "CompL":
        q = F(P.subject, Comp(P.type))
        return fit(ONE_SIDED, "Sub", target, q, canonical(P.type).inner, ih, "CompL")
    if rule == "CompR":
        return _fit_to(ih[0], target, "CompR")
    if rule in ("Abs", "Fix"):
        m = P.subject
        dom = canonical(P.type).dom if rule == "Abs" else P.type
        prem = swap_l0(ih[0], m.binder, dom)
        return fit(ONE_SIDED, rule, target, P, W, [prem], rule)
    if rule == "Match":
        prems = [ih[0]]
        for th, pr in zip(W, ih[1:]):
            for x, t in th:
                pr = swap_l0(pr, x, t)
            prems.append(pr)
        return fit(ONE_SIDED, "Match", target, P, W, prems, "Match")
    if rule in _LEFT_E:
        q = F(P.subject, Comp(OK))
        return fit(ONE_SIDED, rule, target, q, None, ih, rule)
    raise TranslationError(rule, "not a primitive two-sided rule")


# One-sided to two-sided


def translate_one_to_two(d: Derivation) -> Derivation:
    """A primitive two-sided derivation of the same sequent."""
    return _to_two(d)


def _to_two(e: Derivation) -> Derivation:
    prems = [_to_two(p) for p in e.premises]
    P, W, rule = e.principal, e.witness, e.rule
    if rule == "Comp":
        return replace(e, rule="CompR", premises=tuple(prems))
    if rule == "Sub":
        return replace(e, rule="SubR", premises=tuple(prems))
    if rule in _LEFT_E:
        G, D = _schema_context(ONE_SIDED, e)
        constituents = ONE_SIDED[rule][1](P, W, frozenset(), frozenset())[0].right
        cur = prems[0]
        left, right = set(G), set(cur.conclusion.right)
        for g in sorted(constituents, key=show_formula):
            pos = F(g.subject, canonical(g.type).inner)
            right.discard(g)
            cur = two.swap_l(frozenset(left), frozenset(right), pos, cur)
            left.add(pos)
        ok = F(P.subject, OK)
        body = fit(two.PRIMITIVE, rule, Sequent(G | {ok}, D), ok, None, [cur], rule)
        return Derivation("CompR", e.conclusion, P, None, (body,))
    if rule == "Match":
        m = P.subject
        out = [prems[0]]
        for th, pt, pr in zip(W, two.pattern_types(m, W), prems[1:]):
            neg = F(m.scrutinee, Comp(pt))
            c = pr.conclusion
            out.append(two.swap_l(c.left, c.right - {neg}, F(m.scrutinee, pt), pr))
        return fit(two.PRIMITIVE, "Match", e.conclusion, P, W, out, "Match")
    return replace(e, premises=tuple(prems))

