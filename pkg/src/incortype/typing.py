"""The two-sided system: rule schemas, the checker, elaboration of derived
rules, and synthesis of derivations that classify normal forms."""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, Optional

from .reduction import (
    Converged, FuelExhausted, WentWrong, evaluate, is_stuck, is_value,
)
from .sequent import (
    ACCEPT, CheckReport, Derivation, Formula, Sequent, seq,
    show_formula, theta_formulas, weaken,
)
from .subtyping import subtype
from .syntax import (
    Abs, App, Atom, BinOp, Fix, Match, Num, Pair, RelOp, Var,
    apply_subst, as_conditional, as_projection, free_vars, fresh_name,
    pattern_vars, patterns_disjoint, rename_pattern, show_term,
)
from .types import (
    BOOL, BOT, FUN, INT, OK, PAIRVAL, TOP, Arrow, AtomLit, Comp,
    OkT, PairT, Top, canonical, coto, instantiate_pattern, onlyto,
    show_type, theta_ok, union_of,
)


class SchemaError(Exception):
    pass


class ElaborationError(ValueError):
    def __init__(self, path, rule, message):
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"cannot elaborate {rule} at {where}: {message}")
        self.path = tuple(path)
        self.rule = rule
        self.reason = message


class NotNormalFormError(ValueError):
    pass


def F(subject, type_) -> Formula:
    return Formula(subject, type_)


def _want(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _shape(p: Formula):
    return p.subject, canonical(p.type)


def _is(t, cls) -> bool:
    return isinstance(canonical(t), cls)


def context_fv(G, D) -> set:
    out = set()
    for f in G | D:
        out |= f.free_vars()
    return out


def pattern_types(match: Match, thetas) -> list:
    return [instantiate_pattern(p, dict(th)) for (p, _), th in zip(match.branches, thetas)]


def _thetas(match: Match, W) -> tuple:
    _want(isinstance(W, tuple) and len(W) == len(match.branches),
          "needs one pattern type substitution per branch")
    for (p, _), th in zip(match.branches, W):
        names = [x for x, _ in th]
        _want(sorted(names) == sorted(pattern_vars(p)),
              f"substitution domain {sorted(names)} differs from pattern variables {sorted(pattern_vars(p))}")
    return W


# Each rule: side of the principal formula, and a function computing the
# premise sequents from (principal, witness, left context, right context).

RuleFn = Callable


def _var(P, W, G, D):
    _want(isinstance(P.subject, Var), "Var needs a variable subject")
    return []


def _top(P, W, G, D):
    _want(_is(P.type, Top), "Top concludes type Top")
    return []


def _num(P, W, G, D):
    _want(isinstance(P.subject, Num) and canonical(P.type) == INT, "Num concludes n : Int")
    return []


def _atom(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(m, Atom) and a == AtomLit(m.name), "Atom concludes 'a : 'a")
    return []


def _subl(P, W, G, D):
    _want(W is not None, "SubL needs a witness type")
    return [seq(G | {F(P.subject, W)}, D)]


def _subr(P, W, G, D):
    _want(W is not None, "SubR needs a witness type")
    return [seq(G, D | {F(P.subject, W)})]


def _compl(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(a, Comp), "CompL needs a complement type")
    return [seq(G, D | {F(m, a.inner)})]


def _compr(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(a, Comp), "CompR needs a complement type")
    return [seq(G | {F(m, a.inner)}, D)]


def _binop(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(m, BinOp) and a == INT, "BinOp concludes M op N : Int")
    return [seq(G, D | {F(m.lhs, INT)}), seq(G, D | {F(m.rhs, INT)})]


def _relop(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(m, RelOp) and a == canonical(BOOL), "RelOp concludes M rel N : Bool")
    return [seq(G, D | {F(m.lhs, INT)}), seq(G, D | {F(m.rhs, INT)})]


def _fix(P, W, G, D):
    m = P.subject
    _want(isinstance(m, Fix), "Fix needs a fix subject")
    _want(m.binder not in context_fv(G, D), f"binder {m.binder} is free in the context")
    return [seq(G | {F(Var(m.binder), P.type)}, D | {F(m.body, P.type)})]


def _pair(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(m, Pair) and isinstance(a, PairT), "Pair concludes (M, N) : (A, B)")
    return [seq(G, D | {F(m.fst, a.fst)}), seq(G, D | {F(m.snd, a.snd)})]


def _abs(P, W, G, D):
    m, a = _shape(P)
    _want(isinstance(m, Abs) and isinstance(a, Arrow), "Abs concludes fun x -> M : A -> B")
    _want(m.binder not in context_fv(G, D), f"binder {m.binder} is free in the context")
    return [seq(G | {F(Var(m.binder), a.dom)}, D | {F(m.body, a.cod)})]


def _app(P, W, G, D):
    m = P.subject
    _want(isinstance(m, App), "App needs an application subject")
    _want(W is not None, "App needs the argument type as witness")
    return [seq(G, D | {F(m.fun, Arrow(W, P.type))}), seq(G, D | {F(m.arg, W)})]


def _match_common(P, W, G, D):
    m = P.subject
    _want(isinstance(m, Match), "needs a match subject")
    thetas = _thetas(m, W)
    bound = set()
    for p, _ in m.branches:
        bound |= set(pattern_vars(p))
    clash = bound & (context_fv(G, D) | free_vars(m.scrutinee))
    _want(not clash, f"pattern variables {sorted(clash)} are free in the context")
    return m, thetas, pattern_types(m, thetas)


def _match(P, W, G, D):
    m, thetas, pts = _match_common(P, W, G, D)
    out = [seq(G, D | {F(m.scrutinee, union_of(pts))})]
    for (p, n), th, pt in zip(m.branches, thetas, pts):
        out.append(seq(G | set(theta_formulas(th)) | {F(m.scrutinee, pt)}, D | {F(n, P.type)}))
    return out


def _ok_principal(P, cls, name):
    m, a = _shape(P)
    _want(isinstance(m, cls) and isinstance(a, OkT), f"{name} refutes a formula of type Ok")
    return m


def _ope(P, W, G, D):
    m = _ok_principal(P, BinOp, "OpE")
    return [seq(G | {F(m.lhs, INT), F(m.rhs, INT)}, D)]


def _relope(P, W, G, D):
    m = _ok_principal(P, RelOp, "RelOpE")
    return [seq(G | {F(m.lhs, INT), F(m.rhs, INT)}, D)]


def _appe(P, W, G, D):
    m = _ok_principal(P, App, "AppE")
    return [seq(G | {F(m.fun, FUN)}, D)]


def _ok_pattern_union(m: Match):
    return union_of([instantiate_pattern(p, theta_ok(p)) for p, _ in m.branches])


def _matche(P, W, G, D):
    m = _ok_principal(P, Match, "MatchE")
    return [seq(G | {F(m.scrutinee, _ok_pattern_union(m))}, D)]


def _paire(P, W, G, D):
    m = _ok_principal(P, Pair, "PairE")
    return [seq(G | {F(m.fst, OK), F(m.snd, OK)}, D)]


L, R, BOTH = "left", "right", "both"

PRIMITIVE = {
    "Var": (BOTH, _var),
    "Top": (R, _top),
    "Num": (R, _num),
    "Atom": (R, _atom),
    "SubL": (L, _subl),
    "SubR": (R, _subr),
    "CompL": (L, _compl),
    "CompR": (R, _compr),
    "BinOp": (R, _binop),
    "RelOp": (R, _relop),
    "Fix": (R, _fix),
    "Pair": (R, _pair),
    "Abs": (R, _abs),
    "App": (R, _app),
    "Match": (R, _match),
    "OpE": (L, _ope),
    "RelOpE": (L, _relope),
    "AppE": (L, _appe),
    "MatchE": (L, _matche),
    "PairE": (L, _paire),
}


def _side_conditions(rule, P, W, G, D) -> Optional[str]:
    if rule == "SubL" and not subtype(P.type, W):
        return f"{show_type(P.type)} is not a subtype of {show_type(W)}"
    if rule == "SubR" and not subtype(W, P.type):
        return f"{show_type(W)} is not a subtype of {show_type(P.type)}"
    if rule == "Match":
        m = P.subject
        for th in W:
            for x, t in th:
                if not subtype(t, OK):
                    return f"pattern type {x} : {show_type(t)} is not a subtype of Ok"
        for i, (p, _) in enumerate(m.branches):
            for q, _ in m.branches[i + 1:]:
                if not patterns_disjoint(p, q):
                    return "branch patterns overlap"
    return None


def contexts(side, P, concl: Sequent):
    """The two readings of the conclusion context: principal removed, or kept."""
    Lf, Rf = concl.left, concl.right
    if side == R:
        return [(Lf, Rf - {P}), (Lf, Rf)]
    return [(Lf - {P}, Rf), (Lf, Rf)]


def match_schema(table, d: Derivation):
    """Return ((G, D), expected premises, None) or (None, None, reason)."""
    side, fn = table[d.rule]
    P = d.principal
    if P is None:
        return None, None, "missing principal formula"
    concl = d.conclusion
    if side in (L, BOTH) and P not in concl.left:
        return None, None, f"principal {show_formula(P)} is not on the left"
    if side in (R, BOTH) and P not in concl.right:
        return None, None, f"principal {show_formula(P)} is not on the right"
    if side == BOTH:
        if d.premises:
            return None, None, "Var has no premises"
        return (concl.left, concl.right), [], None
    first_reason = None
    for G, D in contexts(side, P, concl):
        try:
            expected = fn(P, d.witness, G, D)
        except SchemaError as e:
            return None, None, str(e)
        if len(expected) != len(d.premises):
            return None, None, f"expects {len(expected)} premises, got {len(d.premises)}"
        bad = [i for i, (e, p) in enumerate(zip(expected, d.premises)) if e != p.conclusion]
        if not bad:
            return (G, D), expected, None
        if first_reason is None:
            i = bad[0]
            first_reason = _diff(i, expected[i], d.premises[i].conclusion)
    return None, None, first_reason


def _diff(i, want: Sequent, got: Sequent) -> str:
    parts = []
    for side, a, b in (("left", want.left, got.left), ("right", want.right, got.right)):
        missing = a - b
        extra = b - a
        if missing:
            parts.append(f"{side} lacks {', '.join(sorted(map(show_formula, missing)))}")
        if extra:
            parts.append(f"{side} has extra {', '.join(sorted(map(show_formula, extra)))}")
    return f"premise {i} does not match the schema ({'; '.join(parts)})"


def check(d: Derivation) -> CheckReport:
    return _check(d, (), PRIMITIVE, _side_conditions)


def _check(d, path, table, sides) -> CheckReport:
    stack = [(d, path)]
    while stack:
        n, p = stack.pop()
        if n.rule not in table:
            reason = (f"derived rule {n.rule} must be elaborated first" if n.rule in DERIVED
                      else f"unknown rule {n.rule}")
            return CheckReport(False, p, n.rule, reason, n.origin)
        ctx, _, reason = match_schema(table, n)
        if reason is None:
            reason = sides(n.rule, n.principal, n.witness, *ctx)
        if reason is not None:
            return CheckReport(False, p, n.rule, reason, n.origin)
        for i in reversed(range(len(n.premises))):
            stack.append((n.premises[i], p + (i,)))
    return ACCEPT


def node(rule, left, right, principal=None, witness=None, premises=()) -> Derivation:
    return Derivation(rule, seq(left, right), principal, witness, tuple(premises))


# Derived rules.  Each entry has the side of its principal, a premise schema
# and an expansion building primitive nodes over the elaborated premises.


def _proj_shape(P, i):
    pr = as_projection(P.subject)
    _want(pr is not None and pr[0] == i, f"needs a projection pi{i} subject")
    return pr[1]


def _cond_shape(P):
    c = as_conditional(P.subject)
    _want(c is not None, "needs an if-then-else subject")
    return c


def _fresh_binder(P: Formula, G, D) -> Formula:
    """Alpha-rename the binders of P away from the context."""
    avoid = context_fv(G, D)
    t = P.subject
    if isinstance(t, (Abs, Fix)) and t.binder in avoid:
        y = fresh_name(t.binder, avoid | free_vars(t.body))
        return F(type(t)(y, apply_subst(t.body, {t.binder: Var(y)})), P.type)
    if isinstance(t, Match):
        avoid = avoid | free_vars(t.scrutinee)
        branches = []
        used = set(avoid)
        for p, n in t.branches:
            used |= free_vars(n)
        for p, n in t.branches:
            ren = {}
            for x in pattern_vars(p):
                if x in avoid:
                    y = fresh_name(x, used)
                    used.add(y)
                    ren[x] = y
            if ren:
                p, n = rename_pattern(p, ren), apply_subst(n, {x: Var(y) for x, y in ren.items()})
            branches.append((p, n))
        return F(Match(t.scrutinee, tuple(branches)), P.type)
    return P


def swap_l(G, D, P, prem) -> Derivation:
    """G, M:A |- D from G |- M:~A, D."""
    nn = F(P.subject, Comp(Comp(P.type)))
    c = node("CompL", G | {nn}, D, nn, premises=[prem])
    return node("SubL", G | {P}, D, P, Comp(Comp(P.type)), [c])


def swap_r(G, D, P, prem) -> Derivation:
    """G |- M:A, D from G, M:~A |- D."""
    nn = F(P.subject, Comp(Comp(P.type)))
    c = node("CompR", G, D | {nn}, nn, premises=[prem])
    return node("SubR", G, D | {P}, P, Comp(Comp(P.type)), [c])


def _prj_theta(m: Match, W):
    p, _ = m.branches[0]
    return ((tuple(sorted([(p.fst.name, W.fst), (p.snd.name, W.snd)]))),)


def expand_prj(G, D, P, W, prem, i) -> Derivation:
    P = _fresh_binder(P, G, D)
    m = P.subject
    p, body = m.branches[0]
    th = _prj_theta(m, W)
    want = W.fst if i == 1 else W.snd
    var = F(body, want)
    left = G | set(theta_formulas(th[0])) | {F(m.scrutinee, W)}
    v = node("Var", left, D | {var}, var)
    return node("Match", G, D | {P}, P, th, [prem, v])


def _prj_schema(i):
    def schema(P, W, G, D):
        m = _proj_shape(P, i)
        _want(isinstance(W, PairT) or _is(W, PairT), f"Prj{i} needs a pair witness type")
        W = canonical(W)
        comp = W.fst if i == 1 else W.snd
        _want(canonical(P.type) == comp, f"Prj{i} concludes the component type of its witness")
        _want(subtype(W, PAIRVAL), f"Prj{i} needs a witness below PairVal")
        return [seq(G, D | {F(m, W)})]

    def expand(P, W, G, D, prems):
        return expand_prj(G, D, P, canonical(W), prems[0], i)

    return R, schema, expand


def _prje_schema(i):
    def schema(P, W, G, D):
        m = _proj_shape(P, i)
        _want(_is(P.type, OkT), f"PrjE{i} refutes type Ok")
        return [seq(G | {F(m, PAIRVAL)}, D)]

    def expand(P, W, G, D, prems):
        return node("MatchE", G | {P}, D, P, premises=prems)

    return L, schema, expand


def _weakl_schema(P, W, G, D):
    return [seq(G, D)]


def _weakr_schema(P, W, G, D):
    return [seq(G, D)]


def _if_schema(P, W, G, D):
    m, n, q = _cond_shape(P)
    return [seq(G, D | {F(m, BOOL)}), seq(G, D | {F(n, P.type)}), seq(G, D | {F(q, P.type)})]


def _if_expand(P, W, G, D, prems):
    m, _, _ = _cond_shape(P)
    b1 = weaken(prems[1], left=[F(m, AtomLit("true"))])
    b2 = weaken(prems[2], left=[F(m, AtomLit("false"))])
    return node("Match", G, D | {P}, P, ((), ()), [prems[0], b1, b2])


def _ife_schema(P, W, G, D):
    m, _, _ = _cond_shape(P)
    _want(_is(P.type, OkT), "IfE refutes type Ok")
    return [seq(G | {F(m, BOOL)}, D)]


def _ife_expand(P, W, G, D, prems):
    return node("MatchE", G | {P}, D, P, premises=prems)


def _match0_schema(P, W, G, D):
    m, thetas, pts = _match_common(P, W, G, D)
    out = [seq(G, D | {F(m.scrutinee, union_of(pts))})]
    for (p, n), th in zip(m.branches, thetas):
        out.append(seq(G | set(theta_formulas(th)), D | {F(n, P.type)}))
    return out


def _match0_expand(P, W, G, D, prems):
    m = P.subject
    pts = pattern_types(m, W)
    branches = [weaken(pr, left=[F(m.scrutinee, pt)]) for pr, pt in zip(prems[1:], pts)]
    return node("Match", G, D | {P}, P, W, [prems[0]] + branches)


def _axiom_l(check_shape):
    def schema(P, W, G, D):
        check_shape(P)
        return []
    return schema


def _botl_shape(P):
    _want(canonical(P.type) == BOT, "BotL refutes type Bot")


def _botl_expand(P, W, G, D, prems):
    t = node("Top", G, D | {F(P.subject, TOP)}, F(P.subject, TOP))
    return node("CompL", G | {P}, D, P, premises=[t])


def _numl_shape(P):
    _want(isinstance(P.subject, Num) and canonical(P.type) == Comp(INT), "NumL refutes n : ~Int")


def _numl_expand(P, W, G, D, prems):
    f = F(P.subject, INT)
    return node("CompL", G | {P}, D, P, premises=[node("Num", G, D | {f}, f)])


def _funl_shape(P):
    _want(isinstance(P.subject, Abs) and canonical(P.type) == Comp(FUN), "FunL refutes fun x -> M : ~Fun")


def _funl_expand(P, W, G, D, prems):
    Q = _fresh_binder(P, G, D)
    lam = Q.subject
    f = F(lam, FUN)
    body = F(lam.body, TOP)
    top = node("Top", G | {F(Var(lam.binder), BOT)}, D | {body}, body)
    ab = node("Abs", G, D | {f}, f, premises=[top])
    return node("CompL", G | {P}, D, P, premises=[ab])


def _atoml_shape(P):
    m, a = _shape(P)
    _want(isinstance(m, Atom) and a == Comp(AtomLit(m.name)), "AtomL refutes 'a : ~'a")


def _atoml_expand(P, W, G, D, prems):
    f = F(P.subject, AtomLit(P.subject.name))
    return node("CompL", G | {P}, D, P, premises=[node("Atom", G, D | {f}, f)])


def _pairl1_shape(P):
    m, a = _shape(P)
    _want(isinstance(m, Pair) and a == Comp(canonical(PairT(TOP, TOP))), "PairL1 refutes (M, N) : ~Pair")


def _pairl1_expand(P, W, G, D, prems):
    m = P.subject
    f = F(m, PairT(TOP, TOP))
    t1 = node("Top", G, D | {F(m.fst, TOP)}, F(m.fst, TOP))
    t2 = node("Top", G, D | {F(m.snd, TOP)}, F(m.snd, TOP))
    pr = node("Pair", G, D | {f}, f, premises=[t1, t2])
    return node("CompL", G | {P}, D, P, premises=[pr])


def _pair_left(P, name):
    m, a = _shape(P)
    _want(isinstance(m, Pair) and isinstance(a, PairT), f"{name} refutes (M, N) : (A, B)")
    return m, a


def _pairll_schema(P, W, G, D):
    m, a = _pair_left(P, "PairLL")
    return [seq(G | {F(m.fst, a.fst)}, D)]


def _pairll_expand(P, W, G, D, prems):
    m, a = _pair_left(P, "PairLL")
    na = F(m.fst, Comp(a.fst))
    c = node("CompR", G, D | {na}, na, premises=prems)
    t = node("Top", G, D | {F(m.snd, TOP)}, F(m.snd, TOP))
    wit = PairT(Comp(a.fst), TOP)
    pr = node("Pair", G, D | {F(m, wit)}, F(m, wit), premises=[c, t])
    q = F(m, Comp(a))
    s = node("SubR", G, D | {q}, q, wit, [pr])
    return swap_l(G, D, P, s)


def _pairrl_schema(P, W, G, D):
    m, a = _pair_left(P, "PairRL")
    return [seq(G, D | {F(m.fst, OK)}), seq(G | {F(m.snd, a.snd)}, D)]


def _pairrl_expand(P, W, G, D, prems):
    m, a = _pair_left(P, "PairRL")
    nb = F(m.snd, Comp(a.snd))
    c = node("CompR", G, D | {nb}, nb, premises=[prems[1]])
    wit = PairT(OK, Comp(a.snd))
    pr = node("Pair", G, D | {F(m, wit)}, F(m, wit), premises=[prems[0], c])
    q = F(m, Comp(a))
    s = node("SubR", G, D | {q}, q, wit, [pr])
    return swap_l(G, D, P, s)


def _prjl_schema(i):
    def witness_pair(P, W):
        _want(W is not None, f"PrjL{i} needs a witness type")
        na = Comp(P.type)
        return PairT(na, W) if i == 1 else PairT(W, na)

    def schema(P, W, G, D):
        m = _proj_shape(P, i)
        wp = witness_pair(P, W)
        _want(subtype(wp, PAIRVAL), f"PrjL{i} needs a witness pair below PairVal")
        return [seq(G, D | {F(m, wp)})]

    def expand(P, W, G, D, prems):
        q = F(P.subject, Comp(P.type))
        pj = expand_prj(G, D, q, witness_pair(P, W), prems[0], i)
        return swap_l(G, D, P, pj)

    return L, schema, expand


def _app_left(P, name):
    m = P.subject
    _want(isinstance(m, App), f"{name} refutes an application")
    return m


def _appl_schema(P, W, G, D):
    m = _app_left(P, "AppL")
    _want(W is not None, "AppL needs a witness type")
    return [seq(G, D | {F(m.fun, onlyto(W, P.type))}), seq(G | {F(m.arg, W)}, D)]


def appl_expand(P, W, G, D, prems) -> Derivation:
    m = P.subject
    nb = F(m.arg, Comp(W))
    c = node("CompR", G, D | {nb}, nb, premises=[prems[1]])
    q = F(m, Comp(P.type))
    app = node("App", G, D | {q}, q, Comp(W), [prems[0], c])
    return swap_l(G, D, P, app)


def _fixl_schema(P, W, G, D):
    m = P.subject
    _want(isinstance(m, Fix), "FixL refutes a fix term")
    _want(m.binder not in context_fv(G, D), f"binder {m.binder} is free in the context")
    return [seq(G | {F(m.body, P.type)}, D | {F(Var(m.binder), P.type)})]


def _fixl_expand(P, W, G, D, prems):
    m = P.subject
    x = Var(m.binder)
    nx = F(x, Comp(P.type))
    cl = node("CompL", G | {nx, F(m.body, P.type)}, D, nx, premises=prems)
    nm = F(m.body, Comp(P.type))
    cr = node("CompR", G | {nx}, D | {nm}, nm, premises=[cl])
    q = F(m, Comp(P.type))
    fx = node("Fix", G, D | {q}, q, premises=[cr])
    return swap_l(G, D, P, fx)


def _neg_theta(th):
    return [F(Var(x), Comp(t)) for x, t in th]


def _matchl_schema(P, W, G, D):
    m, thetas, pts = _match_common(P, W, G, D)
    out = [seq(G, D | {F(m.scrutinee, union_of(pts))})]
    for (p, n), th, pt in zip(m.branches, thetas, pts):
        out.append(seq(G | {F(m.scrutinee, pt), F(n, P.type)}, D | set(_neg_theta(th))))
    return out


def matchl_expand(P, W, G, D, prems) -> Derivation:
    m = P.subject
    pts = pattern_types(m, W)
    branches = []
    for (p, n), th, pt, pr in zip(m.branches, W, pts, prems[1:]):
        left = G | {F(m.scrutinee, pt), F(n, P.type)}
        right = D | set(_neg_theta(th))
        cur = pr
        for x, t in th:
            right = right - {F(Var(x), Comp(t))}
            cur = swap_l(left, right, F(Var(x), t), cur)
            left = left | {F(Var(x), t)}
        base = G | set(theta_formulas(th)) | {F(m.scrutinee, pt)}
        nn = F(n, Comp(P.type))
        branches.append(node("CompR", base, D | {nn}, nn, premises=[cur]))
    q = F(m, Comp(P.type))
    mt = node("Match", G, D | {q}, q, W, [prems[0]] + branches)
    return swap_l(G, D, P, mt)


def _ifl_schema(P, W, G, D):
    m, n, q = _cond_shape(P)
    return [seq(G, D | {F(m, BOOL)}), seq(G | {F(n, P.type)}, D), seq(G | {F(q, P.type)}, D)]


def _ifl_expand(P, W, G, D, prems):
    m, _, _ = _cond_shape(P)
    b1 = weaken(prems[1], left=[F(m, AtomLit("true"))])
    b2 = weaken(prems[2], left=[F(m, AtomLit("false"))])
    return matchl_expand(P, ((), ()), G, D, [prems[0], b1, b2])


def _swapl_schema(P, W, G, D):
    return [seq(G, D | {F(P.subject, Comp(P.type))})]


def _swapr_schema(P, W, G, D):
    return [seq(G | {F(P.subject, Comp(P.type))}, D)]


def _let_shape(P, name):
    m = P.subject
    _want(isinstance(m, App) and isinstance(m.fun, Abs), f"{name} needs a let subject")
    return m.fun.binder, m.fun.body, m.arg


def _let_schema(P, W, G, D):
    x, n, m = _let_shape(P, "Let")
    _want(W is not None, "Let needs a witness type")
    _want(x not in context_fv(G, D), f"binder {x} is free in the context")
    return [seq(G, D | {F(m, W)}), seq(G | {F(Var(x), W)}, D | {F(n, P.type)})]


def _let_expand(P, W, G, D, prems):
    lam = P.subject.fun
    f = F(lam, Arrow(W, P.type))
    ab = node("Abs", G, D | {f}, f, premises=[prems[1]])
    return node("App", G, D | {P}, P, W, [ab, prems[0]])


def _letl_schema(P, W, G, D):
    x, n, m = _let_shape(P, "LetL")
    _want(W is not None, "LetL needs a witness type")
    _want(x not in context_fv(G, D), f"binder {x} is free in the context")
    return [seq(G | {F(n, P.type)}, D | {F(Var(x), W)}), seq(G | {F(m, W)}, D)]


def _co_lambda(G, D, lam: Abs, dom, cod, prem):
    """G |- fun x -> M : ~dom -> ~cod, D from G, M:cod |- x:dom, D."""
    nx = F(Var(lam.binder), Comp(dom))
    cl = node("CompL", G | {nx, F(lam.body, cod)}, D, nx, premises=[prem])
    nm = F(lam.body, Comp(cod))
    cr = node("CompR", G | {nx}, D | {nm}, nm, premises=[cl])
    f = F(lam, onlyto(dom, cod))
    return node("Abs", G, D | {f}, f, premises=[cr])


def _letl_expand(P, W, G, D, prems):
    ab = _co_lambda(G, D, P.subject.fun, W, P.type, prems[0])
    return appl_expand(P, W, G, D, [ab, prems[1]])


def _coto_parts(P):
    a = canonical(P.type)
    _want(isinstance(a, Comp) and isinstance(a.inner, Arrow)
          and isinstance(a.inner.dom, Comp) and isinstance(a.inner.cod, Comp),
          "needs a coarrow type B coto A")
    return a.inner.dom.inner, a.inner.cod.inner


def _coabs_schema(P, W, G, D):
    m = P.subject
    _want(isinstance(m, Abs), "CoAbs refutes an abstraction")
    _want(m.binder not in context_fv(G, D), f"binder {m.binder} is free in the context")
    b, a = _coto_parts(P)
    return [seq(G | {F(m.body, a)}, D | {F(Var(m.binder), b)})]


def _coabs_expand(P, W, G, D, prems):
    b, a = _coto_parts(P)
    ab = _co_lambda(G, D, P.subject, b, a, prems[0])
    return node("CompL", G | {P}, D, P, premises=[ab])


def _coapp_schema(P, W, G, D):
    m = _app_left(P, "CoApp")
    _want(W is not None, "CoApp needs a witness type")
    return [seq(G | {F(m.fun, coto(W, P.type))}, D), seq(G | {F(m.arg, W)}, D)]


def _coapp_expand(P, W, G, D, prems):
    m = P.subject
    sr = swap_r(G, D, F(m.fun, onlyto(W, P.type)), prems[0])
    return appl_expand(P, W, G, D, [sr, prems[1]])


def _absl_parts(P):
    m, t = _shape(P)
    _want(isinstance(m, Abs) and isinstance(t, Comp) and isinstance(t.inner, Arrow),
          "AbsL refutes fun x -> M : ~(A -> B)")
    return m, t.inner.dom, t.inner.cod


def _absl_schema(P, W, G, D):
    m, a, b = _absl_parts(P)
    _want(m.binder not in context_fv(G, D), f"binder {m.binder} is free in the context")
    return [seq(G | {F(m.body, Comp(b))}, D | {F(Var(m.binder), Comp(a))})]


def _absl_expand(P, W, G, D, prems):
    m, a, b = _absl_parts(P)
    x = Var(m.binder)
    nxa = F(x, Comp(a))
    mb = F(m.body, b)
    sr = swap_r(G, D | {nxa}, mb, prems[0])
    sl = swap_l(G, D | {mb}, F(x, a), sr)
    f = F(m, Arrow(a, b))
    ab = node("Abs", G, D | {f}, f, premises=[sl])
    return node("CompL", G | {P}, D, P, premises=[ab])


DERIVED = {
    "WeakL": (L, _weakl_schema, lambda P, W, G, D, pr: weaken(pr[0], left=[P])),
    "WeakR": (R, _weakr_schema, lambda P, W, G, D, pr: weaken(pr[0], right=[P])),
    "Prj1": _prj_schema(1),
    "Prj2": _prj_schema(2),
    "PrjE1": _prje_schema(1),
    "PrjE2": _prje_schema(2),
    "If": (R, _if_schema, _if_expand),
    "IfE": (L, _ife_schema, _ife_expand),
    "Match0": (R, _match0_schema, _match0_expand),
    "BotL": (L, _axiom_l(_botl_shape), _botl_expand),
    "NumL": (L, _axiom_l(_numl_shape), _numl_expand),
    "FunL": (L, _axiom_l(_funl_shape), _funl_expand),
    "AtomL": (L, _axiom_l(_atoml_shape), _atoml_expand),
    "PairL1": (L, _axiom_l(_pairl1_shape), _pairl1_expand),
    "PairLL": (L, _pairll_schema, _pairll_expand),
    "PairRL": (L, _pairrl_schema, _pairrl_expand),
    "PrjL1": _prjl_schema(1),
    "PrjL2": _prjl_schema(2),
    "AppL": (L, _appl_schema, appl_expand),
    "FixL": (L, _fixl_schema, _fixl_expand),
    "MatchL": (L, _matchl_schema, matchl_expand),
    "IfL": (L, _ifl_schema, _ifl_expand),
    "SwapL": (L, _swapl_schema, lambda P, W, G, D, pr: swap_l(G, D, P, pr[0])),
    "SwapR": (R, _swapr_schema, lambda P, W, G, D, pr: swap_r(G, D, P, pr[0])),
    "Let": (R, _let_schema, _let_expand),
    "LetL": (L, _letl_schema, _letl_expand),
    "CoAbs": (L, _coabs_schema, _coabs_expand),
    "CoApp": (L, _coapp_schema, _coapp_expand),
    "AbsL": (L, _absl_schema, _absl_expand),
}

# schemas of every rule usable in a two-sided script, for premise inference
TWO_SIDED_SCHEMAS = dict(PRIMITIVE)
TWO_SIDED_SCHEMAS.update({k: (v[0], v[1]) for k, v in DERIVED.items()})


def elaborate(d: Derivation) -> Derivation:
    return _elaborate(d, ())


def _elaborate(d: Derivation, path) -> Derivation:
    premises = tuple(_elaborate(p, path + (i,)) for i, p in enumerate(d.premises))
    if d.rule in PRIMITIVE:
        if premises == d.premises and d.origin == path:
            return d
        return replace(d, premises=premises, origin=path)
    if d.rule not in DERIVED:
        raise ElaborationError(path, d.rule, "unknown rule")
    side, schema, expand = DERIVED[d.rule]
    probe = Derivation(d.rule, d.conclusion, d.principal, d.witness, premises)
    ctx, _, reason = match_schema(TWO_SIDED_SCHEMAS, probe)
    if reason is not None:
        raise ElaborationError(path, d.rule, reason)
    G, D = ctx
    try:
        out = expand(d.principal, d.witness, G, D, list(premises))
    except SchemaError as e:
        raise ElaborationError(path, d.rule, str(e))
    if out.conclusion != d.conclusion:
        raise ElaborationError(path, d.rule, "expansion changed the conclusion")
    return _stamp(out, path)


def _stamp(d: Derivation, path) -> Derivation:
    """Mark freshly built nodes with the source path they came from."""
    if d.origin:
        return d
    return replace(d, origin=path, premises=tuple(_stamp(p, path) for p in d.premises))


def is_primitive(d: Derivation) -> bool:
    return all(n.rule in PRIMITIVE for _, n in d.nodes())


def verify(d: Derivation) -> CheckReport:
    """Elaborate, then check."""
    try:
        e = elaborate(d)
    except ElaborationError as err:
        return CheckReport(False, err.path, err.rule, err.reason, err.path)
    return check(e)


# Synthesis of classifying derivations for closed normal forms


def precise_type(v):
    if isinstance(v, Num):
        return INT
    if isinstance(v, Atom):
        return AtomLit(v.name)
    if isinstance(v, Abs):
        return FUN
    if isinstance(v, Pair):
        return PairT(precise_type(v.fst), precise_type(v.snd))
    raise NotNormalFormError(f"not a value: {show_term(v)}")


def derive_precise(v, G=frozenset(), D=frozenset()) -> Derivation:
    """G |- V : ty(V), D for a value V."""
    f = F(v, precise_type(v))
    if isinstance(v, Num):
        return node("Num", G, D | {f}, f)
    if isinstance(v, Atom):
        return node("Atom", G, D | {f}, f)
    if isinstance(v, Abs):
        q = _fresh_binder(f, G, D)
        lam = q.subject
        body = F(lam.body, TOP)
        top = node("Top", G | {F(Var(lam.binder), BOT)}, D | {body}, body)
        return node("Abs", G, D | {f}, q, premises=[top])
    a = derive_precise(v.fst, G, D)
    b = derive_precise(v.snd, G, D)
    return node("Pair", G, D | {f}, f, premises=[a, b])


def derive_value(v, G=frozenset(), D=frozenset()) -> Derivation:
    f = F(v, OK)
    return node("SubR", G, D | {f}, f, precise_type(v), [derive_precise(v, G, D)])


def _refute_as(u, target, G, D) -> Derivation:
    """G |- U : ~target, D for a normal form U disjoint from target."""
    f = F(u, Comp(target))
    if is_stuck(u):
        return node("SubR", G, D | {f}, f, Comp(OK), [derive_stuck(u, G, D)])
    return node("SubR", G, D | {f}, f, precise_type(u), [derive_precise(u, G, D)])


def derive_stuck(s, G=frozenset(), D=frozenset()) -> Derivation:
    """G |- S : ~Ok, D for a stuck term S."""
    refute = _refute_stuck(s, G, D)
    f = F(s, Comp(OK))
    return node("CompR", G, D | {f}, f, premises=[refute])


def _refute_stuck(s, G, D) -> Derivation:
    """G, S : Ok |- D."""
    P = F(s, OK)
    if isinstance(s, Pair):
        if is_stuck(s.fst):
            keep, bad = s.snd, s.fst
        else:
            keep, bad = s.fst, s.snd
        kf, bf = F(keep, OK), F(bad, OK)
        ctx = G | {kf}
        inner = swap_l(ctx - {bf}, D, bf, derive_stuck(bad, ctx - {bf}, D))
        return node("PairE", G | {P}, D, P, premises=[inner])
    if isinstance(s, (BinOp, RelOp)):
        rule = "OpE" if isinstance(s, BinOp) else "RelOpE"
        if isinstance(s.lhs, Num):
            keep, bad = s.lhs, s.rhs
        else:
            keep, bad = s.rhs, s.lhs
        kf, bf = F(keep, INT), F(bad, INT)
        ctx = (G | {kf}) - {bf}
        inner = swap_l(ctx, D, bf, _refute_as(bad, INT, ctx, D))
        return node(rule, G | {P}, D, P, premises=[inner])
    if isinstance(s, App):
        bf = F(s.fun, FUN)
        inner = swap_l(G, D, bf, _refute_as(s.fun, FUN, G, D))
        return node("AppE", G | {P}, D, P, premises=[inner])
    if isinstance(s, Match):
        target = _ok_pattern_union(s)
        bf = F(s.scrutinee, target)
        inner = swap_l(G, D, bf, _refute_as(s.scrutinee, target, G, D))
        return node("MatchE", G | {P}, D, P, premises=[inner])
    raise NotNormalFormError(f"not a stuck term: {show_term(s)}")


def classify_and_derive(u):
    """('value', |- U : Ok) or ('stuck', |- U : ~Ok), both primitive."""
    if free_vars(u):
        raise NotNormalFormError("classification needs a closed term")
    if is_value(u):
        return "value", derive_value(u)
    if is_stuck(u):
        return "stuck", derive_stuck(u)
    raise NotNormalFormError(f"not a normal form: {show_term(u)}")


def dynamic_soundness_check(d: Derivation, fuel: Optional[int] = None) -> str:
    concl = d.conclusion
    if not concl.left and len(concl.right) == 1:
        (f,) = concl.right
        positive = subtype(f.type, OK)
        negative = subtype(f.type, Comp(OK))
        r = evaluate(f.subject, fuel)
        if isinstance(r, FuelExhausted):
            return "inconclusive"
        if positive and isinstance(r, WentWrong):
            return "violated"
        if negative and isinstance(r, Converged):
            return "violated"
        return "consistent"
    if not concl.right and len(concl.left) == 1:
        (f,) = concl.left
        if canonical(f.type) != OK:
            raise ValueError("left conclusion must ascribe Ok")
        r = evaluate(f.subject, fuel)
        if isinstance(r, FuelExhausted):
            return "inconclusive"
        return "violated" if isinstance(r, Converged) else "consistent"
    raise ValueError("conclusion must be |- M : A or M : Ok |-")


def reason_tag(reason: str) -> str:
    """A short category for a rejection reason, used by expected verdicts."""
    if "pattern type" in reason or "substitution domain" in reason:
        return "patsubst"
    if "is not a subtype" in reason:
        return "subtype"
    if "free in the context" in reason:
        return "freshness"
    if "not a variable typing" in reason:
        return "left-variable"
    if "overlap" in reason:
        return "disjointness"
    if "unknown rule" in reason or "must be elaborated" in reason or "not a one-sided rule" in reason:
        return "rule"
    return "schema"
