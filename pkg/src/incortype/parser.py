"""Concrete syntax for terms, types, derivations and proof scripts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .sequent import Derivation, Formula, Sequent, seq, show_formula, show_side
from .subtyping import SubDerivation
from .syntax import (
    DIV, Abs, App, Atom, BinOp, Fix, Match, Num, PAtom, PPair, PVar, Pair,
    RelOp, Var, conditional, let_in, projection,
)
from .types import (
    ATOMS, BOOL, BOT, FUN, INT, OK, PAIR, PAIRVAL, TOP, Arrow, AtomLit, Comp,
    PairT, Union, coto, meet, onlyto, show_type,
)


class ParseError(ValueError):
    def __init__(self, message, pos=None, src=None):
        where = ""
        if pos is not None and src is not None:
            line = src.count("\n", 0, pos) + 1
            col = pos - (src.rfind("\n", 0, pos) + 1) + 1
            where = f" at line {line}, column {col}"
        super().__init__(f"{message}{where}")
        self.pos = pos


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<atom>'[a-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<ref>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|\\/|/\\|<=|>=|\|-|[=<>+\-*~(),|\[\]:;])
""", re.VERBOSE)

KEYWORDS = {"fun", "fix", "let", "in", "if", "then", "else", "match", "with", "end",
            "pi1", "pi2", "div"}
TYPE_NAMES = {"Top": TOP, "Ok": OK, "Atoms": ATOMS, "Int": INT, "Bot": BOT,
              "Pair": PAIR, "PairVal": PAIRVAL, "Fun": FUN, "Bool": BOOL}


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(src: str) -> list:
    out, i = [], 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", i, src)
        if m.lastgroup != "ws":
            out.append(Tok(m.lastgroup, m.group(), i))
        i = m.end()
    out.append(Tok("eof", "", len(src)))
    return out


_REL = {"=": "eq", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_ATOMIC_START = {"atom", "int", "ident", "ref"}


class _Parser:
    def __init__(self, src: str, env: Optional[dict] = None):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.env = env or {}

    # helpers
    def peek(self, k=0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.peek()
        self.i += 1
        return t

    def at(self, text) -> bool:
        t = self.peek()
        return t.kind in ("op", "ident") and t.text == text

    def expect(self, text) -> Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def fail(self, msg):
        t = self.peek()
        found = t.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", t.pos, self.src)

    def ident(self) -> str:
        t = self.peek()
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail("expected an identifier")
        return self.next().text

    def done(self):
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")

    def ref(self, kind):
        t = self.next()
        name = t.text[1:]
        val = self.env.get(name)
        if val is None or val[0] != kind:
            raise ParseError(f"undefined {kind} @{name}", t.pos, self.src)
        return val[1]

    # terms
    def term(self):
        if self.at("fun") or self.at("fix"):
            kw = self.next().text
            names = [self.ident()]
            while self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
                names.append(self.ident())
            self.expect("->")
            body = self.term()
            if kw == "fix":
                if len(names) != 1:
                    self.fail("fix binds one variable")
                return Fix(names[0], body)
            for x in reversed(names):
                body = Abs(x, body)
            return body
        if self.at("let"):
            self.next()
            x = self.ident()
            self.expect("=")
            m = self.term()
            self.expect("in")
            return let_in(x, m, self.term())
        if self.at("if"):
            self.next()
            m = self.term()
            self.expect("then")
            n = self.term()
            self.expect("else")
            return conditional(m, n, self.term())
        return self.relation()

    def relation(self):
        lhs = self.sum()
        t = self.peek()
        if t.kind == "op" and t.text in _REL:
            self.next()
            return RelOp(_REL[t.text], lhs, self.sum())
        return lhs

    def sum(self):
        lhs = self.product()
        while self.at("+") or self.at("-"):
            op = "add" if self.next().text == "+" else "sub"
            lhs = BinOp(op, lhs, self.product())
        return lhs

    def product(self):
        lhs = self.application()
        while self.at("*"):
            self.next()
            lhs = BinOp("mul", lhs, self.application())
        return lhs

    def starts_atomic(self) -> bool:
        t = self.peek()
        if t.kind == "ident":
            return t.text not in KEYWORDS or t.text in ("match", "div", "pi1", "pi2")
        return t.kind in _ATOMIC_START or (t.kind == "op" and t.text == "(")

    def application(self):
        negative = self.at("-") and self.peek(1).kind == "int"
        if not (self.starts_atomic() or negative):
            if self.at("fun") or self.at("fix") or self.at("let") or self.at("if"):
                return self.term()
            self.fail("expected a term")
        head = self.atomic()
        while self.starts_atomic():
            head = App(head, self.atomic())
        if self.at("fun") or self.at("fix") or self.at("let") or self.at("if"):
            head = App(head, self.term())
        return head

    def atomic(self):
        t = self.peek()
        if t.kind == "atom":
            self.next()
            return Atom(t.text[1:])
        if t.kind == "int":
            self.next()
            return Num(int(t.text))
        if t.kind == "ref":
            return self.ref("term")
        if t.kind == "ident":
            if t.text == "div":
                self.next()
                return DIV
            if t.text in ("pi1", "pi2"):
                self.next()
                return projection(self.atomic(), int(t.text[2]))
            if t.text == "match":
                return self.match()
            return Var(self.ident())
        if self.at("-") and self.peek(1).kind == "int":
            self.next()
            return Num(-int(self.next().text))
        if self.at("("):
            self.next()
            a = self.term()
            if self.at(","):
                self.next()
                b = self.term()
                self.expect(")")
                return Pair(a, b)
            self.expect(")")
            return a
        self.fail("expected a term")

    def match(self):
        self.expect("match")
        scrutinee = self.term()
        self.expect("with")
        branches = []
        if not self.at("|"):
            branches.append(self.branch())
        while self.at("|"):
            self.next()
            branches.append(self.branch())
        self.expect("end")
        return Match(scrutinee, tuple(branches))

    def branch(self):
        p = self.pattern()
        self.expect("->")
        return p, self.term()

    def pattern(self):
        t = self.peek()
        if t.kind == "atom":
            self.next()
            return PAtom(t.text[1:])
        if t.kind == "ident":
            return PVar(self.ident())
        if self.at("("):
            self.next()
            a = self.pattern()
            if self.at(","):
                self.next()
                b = self.pattern()
                self.expect(")")
                return PPair(a, b)
            self.expect(")")
            return a
        self.fail("expected a pattern")

    # types: arrows < unions < meets < prefix
    def type(self):
        lhs = self.union()
        for kw, build in (("->", Arrow), ("onlyto", onlyto), ("coto", coto)):
            if self.at(kw):
                self.next()
                return build(lhs, self.type())
        return lhs

    def union(self):
        members = [self.meet()]
        while self.at("\\/"):
            self.next()
            members.append(self.meet())
        return members[0] if len(members) == 1 else Union(tuple(members))

    def meet(self):
        members = [self.prefix()]
        while self.at("/\\"):
            self.next()
            members.append(self.prefix())
        return members[0] if len(members) == 1 else meet(members)

    def prefix(self):
        if self.at("~"):
            self.next()
            return Comp(self.prefix())
        return self.type_atomic()

    def type_atomic(self):
        t = self.peek()
        if t.kind == "atom":
            self.next()
            return AtomLit(t.text[1:])
        if t.kind == "ref":
            return self.ref("type")
        if t.kind == "ident" and t.text in TYPE_NAMES:
            self.next()
            return TYPE_NAMES[t.text]
        if self.at("("):
            self.next()
            a = self.type()
            if self.at(","):
                self.next()
                b = self.type()
                self.expect(")")
                return PairT(a, b)
            self.expect(")")
            return a
        self.fail("expected a type")

    # formulas and sequents
    def formula(self):
        m = self.term()
        self.expect(":")
        return Formula(m, self.type())

    def side(self, stop):
        out = []
        if self.at(stop) or self.peek().kind == "eof":
            return out
        out.append(self.formula())
        while self.at(";"):
            self.next()
            out.append(self.formula())
        return out

    def sequent(self):
        left = self.side("|-")
        self.expect("|-")
        right = self.side("")
        return seq(left, right)

    def theta_list(self):
        out = []
        while self.at("["):
            self.next()
            th = []
            while not self.at("]"):
                x = self.ident()
                self.expect(":")
                th.append((x, self.type()))
                if not self.at(","):
                    break
                self.next()
            self.expect("]")
            out.append(tuple(sorted(th)))
        return tuple(out)


def _run(src, env, method):
    p = _Parser(src, env)
    out = getattr(p, method)()
    p.done()
    return out


def parse_term(src: str, env: Optional[dict] = None):
    return _run(src, env, "term")


def parse_type(src: str, env: Optional[dict] = None):
    return _run(src, env, "type")


def parse_formula(src: str, env: Optional[dict] = None) -> Formula:
    return _run(src, env, "formula")


def parse_sequent(src: str, env: Optional[dict] = None) -> Sequent:
    return _run(src, env, "sequent")


def parse_theta(src: str, env: Optional[dict] = None) -> tuple:
    return _run(src, env, "theta_list")


def parse_goal(src: str, env: Optional[dict] = None) -> tuple:
    p = _Parser(src, env)
    a = p.type()
    p.expect("<=")
    b = p.type()
    p.done()
    return a, b


# Derivation trees: (Rule :key value ... :premises (...) (...))


@dataclass
class RawNode:
    rule: str
    fields: dict
    premises: list
    pos: int


_KEY = re.compile(r":([a-z]+)\b")


def _read_nodes(src: str, i: int, out: list) -> int:
    n = len(src)
    while True:
        while i < n and (src[i].isspace() or src[i] == "#"):
            if src[i] == "#":
                while i < n and src[i] != "\n":
                    i += 1
            else:
                i += 1
        if i >= n or src[i] != "(":
            return i
        node, i = _read_node(src, i)
        out.append(node)


def _read_node(src: str, i: int):
    start = i
    i += 1
    m = re.compile(r"\s*([A-Za-z][A-Za-z0-9\-]*)").match(src, i)
    if not m:
        raise ParseError("expected a rule name", i, src)
    rule = m.group(1)
    i = m.end()
    fields, premises = {}, []
    key, value_start, depth = None, None, 0
    n = len(src)
    while True:
        if i >= n:
            raise ParseError("unterminated node", start, src)
        c = src[i]
        if depth == 0 and c == ")":
            if key is not None:
                fields[key] = (src[value_start:i].strip(), value_start)
            return RawNode(rule, fields, premises, start), i + 1
        if depth == 0 and c == ":" and (i == 0 or src[i - 1].isspace()):
            km = _KEY.match(src, i)
            if km:
                if key is not None:
                    fields[key] = (src[value_start:i].strip(), value_start)
                key = km.group(1)
                i = km.end()
                if key == "premises":
                    i = _read_nodes(src, i, premises)
                    key = None
                    continue
                value_start = i
                continue
        if depth == 0 and key is None and not c.isspace():
            raise ParseError(f"unexpected text in {rule} node", i, src)
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        i += 1


def _sub_error(e: ParseError, offset: int, src: str):
    pos = offset + (e.pos or 0)
    return ParseError(str(e).split(" at line")[0], pos, src)


def _field(raw: RawNode, key, parse, env, src):
    if key not in raw.fields:
        return None
    text, off = raw.fields[key]
    try:
        return parse(text, env)
    except ParseError as e:
        raise _sub_error(e, off + (len(src[off:]) - len(src[off:].lstrip())), src)


THETA_RULES = {"Match", "Match0", "MatchL"}
NO_WITNESS = {"If", "IfL"}


def _witness(raw, env, src, system):
    if "witness" not in raw.fields:
        return None
    if system == "legacy-subtyping":
        text, off = raw.fields["witness"]
        if re.fullmatch(r"\d+", text):
            return int(text)
        return _field(raw, "witness", parse_type, env, src)
    if raw.rule in THETA_RULES:
        return _field(raw, "witness", parse_theta, env, src)
    return _field(raw, "witness", parse_type, env, src)


def schema_table(system: str):
    if system == "one-sided":
        from .onesided import ONE_SIDED
        return ONE_SIDED
    from .typing import TWO_SIDED_SCHEMAS
    return TWO_SIDED_SCHEMAS


def infer_premises(table, rule, principal, witness, concl: Sequent):
    """Premise sequents of a node, reading contexts with the principal removed."""
    from . import typing as two
    if rule not in table:
        return None
    side, fn = table[rule]
    if side == two.BOTH or principal is None:
        return []
    G, D = two.contexts(side, principal, concl)[0]
    try:
        return fn(principal, witness, G, D)
    except (two.SchemaError, ValueError):
        return None


def _build(raw: RawNode, concl, env, src, system, table):
    if "conclusion" in raw.fields:
        concl = _field(raw, "conclusion", parse_sequent, env, src)
    if concl is None:
        raise ParseError(f"cannot infer the conclusion of this {raw.rule} node", raw.pos, src)
    principal = _field(raw, "principal", parse_formula, env, src)
    witness = _witness(raw, env, src, system)
    expected = infer_premises(table, raw.rule, principal, witness, concl) or []
    premises = []
    for k, p in enumerate(raw.premises):
        pc = expected[k] if k < len(expected) else None
        premises.append(_build(p, pc, env, src, system, table))
    return Derivation(raw.rule, concl, principal, witness, tuple(premises))


def legacy_premise_goals(rule, a, b, witness):
    try:
        if rule == "Pair":
            return [(a.fst, b.fst), (a.snd, b.snd)]
        if rule == "Fun":
            return [(b.dom, a.dom), (a.cod, b.cod)]
        if rule == "UnionL":
            return [(m, b) for m in a.members]
        if rule == "UnionR":
            return [(a, b.members[witness - 1])]
        if rule == "CompL":
            return [(Comp(b), a.inner)]
        if rule == "CompR":
            return [(b.inner, Comp(a))]
        if rule == "Trans":
            return [(a, witness), (witness, b)]
    except (AttributeError, IndexError, TypeError):
        return None
    return []


def _build_legacy(raw, goal, env, src):
    if "conclusion" in raw.fields:
        goal = _field(raw, "conclusion", parse_goal, env, src)
    if goal is None:
        raise ParseError(f"cannot infer the conclusion of this {raw.rule} node", raw.pos, src)
    witness = _witness(raw, env, src, "legacy-subtyping")
    a, b = goal
    goals = legacy_premise_goals(raw.rule, a, b, witness) or []
    premises = []
    for k, p in enumerate(raw.premises):
        premises.append(_build_legacy(p, goals[k] if k < len(goals) else None, env, src))
    return SubDerivation(raw.rule, a, b, tuple(premises), witness)


def parse_derivation(text: str, conclusion=None, system: str = "two-sided", env=None):
    nodes = []
    end = _read_nodes(text, 0, nodes)
    if len(nodes) != 1 or text[end:].strip():
        raise ParseError("expected exactly one derivation tree", end, text)
    if system == "legacy-subtyping":
        return _build_legacy(nodes[0], conclusion, env or {}, text)
    return _build(nodes[0], conclusion, env or {}, text, system, schema_table(system))


# Printing derivations


def show_theta(theta) -> str:
    return " ".join("[" + ", ".join(f"{x} : {show_type(t)}" for x, t in th) + "]" for th in theta)


def _show_witness(rule, w, system):
    if w is None:
        return None
    if isinstance(w, int):
        return str(w)
    if isinstance(w, tuple):
        return show_theta(w)
    return show_type(w)


def serialize_derivation(d, system: str = "two-sided", root_known: bool = False) -> str:
    """The node syntax; the root conclusion is written unless root_known."""
    if system == "legacy-subtyping":
        return _ser_legacy(d, 0, (d.lhs, d.rhs) if root_known else None)
    return _ser(d, 0, None if root_known else False, schema_table(system), system)


def _ser(d, indent, expected, table, system) -> str:
    pad = "  " * indent
    parts = [f"({d.rule}"]
    if d.principal is not None:
        parts.append(f":principal {show_formula(d.principal)}")
    w = _show_witness(d.rule, d.witness, system)
    if w is not None:
        parts.append(f":witness {w}")
    if expected is not None and expected != d.conclusion:
        # False marks a node whose conclusion cannot be inferred
        parts.append(f":conclusion {show_sequent_text(d.conclusion)}")
    head = pad + " ".join(parts)
    if not d.premises:
        return head + ")"
    inferred = infer_premises(table, d.rule, d.principal, d.witness, d.conclusion) or []
    lines = [head + " :premises"]
    for k, p in enumerate(d.premises):
        e = inferred[k] if k < len(inferred) else False
        lines.append(_ser(p, indent + 1, e, table, system))
    return "\n".join(lines) + ")"


def _ser_legacy(d, indent, expected) -> str:
    pad = "  " * indent
    parts = [f"({d.rule}"]
    if d.witness is not None:
        parts.append(f":witness {_show_witness(d.rule, d.witness, 'legacy-subtyping')}")
    if expected is None or expected != (d.lhs, d.rhs):
        parts.append(f":conclusion {show_type(d.lhs)} <= {show_type(d.rhs)}")
    head = pad + " ".join(parts)
    if not d.premises:
        return head + ")"
    goals = legacy_premise_goals(d.rule, d.lhs, d.rhs, d.witness) or []
    lines = [head + " :premises"]
    for k, p in enumerate(d.premises):
        lines.append(_ser_legacy(p, indent + 1, goals[k] if k < len(goals) else False))
    return "\n".join(lines) + ")"


def show_sequent_text(s: Sequent) -> str:
    left, right = show_side(s.left), show_side(s.right)
    return (f"{left} |- {right}").strip()


# Scripts


SYSTEMS = ("two-sided", "one-sided", "legacy-subtyping")


@dataclass
class Script:
    system: str
    expect: str
    reject_tag: Optional[str]
    definitions: dict
    conclusion: object
    derivation: object
    name: str = ""


def parse_script(text: str, name: str = "") -> Script:
    system, expect, tag = "two-sided", "accept", None
    env: dict = {}
    conclusion_src = None
    lines = text.split("\n")
    offset = 0
    body_start = None
    for k, line in enumerate(lines):
        s = line.strip()
        here = offset + (len(line) - len(line.lstrip()))
        offset += len(line) + 1
        if not s or s.startswith("#"):
            continue
        if s.startswith("derivation:"):
            body_start = offset - len(line) - 1 + line.index("derivation:") + len("derivation:")
            break
        if s.startswith("system:"):
            system = s[len("system:"):].strip()
            if system not in SYSTEMS:
                raise ParseError(f"unknown system {system!r}", here, text)
        elif s.startswith("expect:"):
            words = s[len("expect:"):].split()
            if not words or words[0] not in ("accept", "reject"):
                raise ParseError("expect must be accept or reject <tag>", here, text)
            expect = words[0]
            tag = words[1] if len(words) > 1 else None
        elif s.startswith("term ") or s.startswith("type "):
            kind, rest = s.split(None, 1)
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)\Z", rest, re.S)
            if not m:
                raise ParseError(f"malformed {kind} definition", here, text)
            parse = parse_term if kind == "term" else parse_type
            try:
                env[m.group(1)] = (kind, parse(m.group(2), env))
            except ParseError as e:
                raise ParseError(f"in definition of {m.group(1)}: {e}", here, text)
        elif s.startswith("conclusion:"):
            conclusion_src = s[len("conclusion:"):].strip()
        else:
            raise ParseError(f"unknown header line {s!r}", here, text)
    if body_start is None:
        raise ParseError("missing derivation section", len(text), text)
    if conclusion_src is None:
        raise ParseError("missing conclusion header", 0, text)
    try:
        if system == "legacy-subtyping":
            conclusion = parse_goal(conclusion_src, env)
        else:
            conclusion = parse_sequent(conclusion_src, env)
    except ParseError as e:
        raise ParseError(f"in conclusion: {e}")
    body = text[body_start:]
    try:
        derivation = parse_derivation(body, conclusion, system, env)
    except ParseError as e:
        raise ParseError(f"in derivation: {e}")
    return Script(system, expect, tag, env, conclusion, derivation, name)


def write_script(derivation, system: str = "two-sided", expect: str = "accept",
                 comment: str = "") -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"system: {system}")
    lines.append(f"expect: {expect}")
    if system == "legacy-subtyping":
        lines.append(f"conclusion: {show_type(derivation.lhs)} <= {show_type(derivation.rhs)}")
    else:
        lines.append(f"conclusion: {show_sequent_text(derivation.conclusion)}")
    lines.append("derivation:")
    lines.append(serialize_derivation(derivation, system, root_known=True))
    return "\n".join(lines) + "\n"
