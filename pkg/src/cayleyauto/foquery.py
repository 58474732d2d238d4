"""First-order queries over automatic relations.

Formulas are compiled bottom-up into relation automata: conjunction is a
natural join on variable names, disjunction a union after cylindrifying
both sides to the same variables, negation a difference against the
domain tuples, and an existential a projection.  Existentials over a
conjunction are pushed inward one variable at a time, so intermediate
automata only carry the variables that are still needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from . import encodings as enc
from .automata import (
    AutomatonError,
    Dfa,
    convolve,
    difference,
    merge_alphabets,
    project,
)
from .relations import as_tracks, from_tracks, identity_relation, join, permute, tuple_language, union_rel


class FormulaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# relation automata with named tracks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelAutomaton:
    """Automaton over k-track convolutions with one variable per track.

    With no variables, ``automaton`` has an empty alphabet and accepts the
    empty word exactly when the sentence is true.
    """

    automaton: Dfa
    varnames: tuple
    domain: Dfa

    @property
    def arity(self) -> int:
        return len(self.varnames)

    def accepts(self, *words) -> bool:
        if len(words) != self.arity:
            raise FormulaError(f"expected {self.arity} words, got {len(words)}")
        if not words:
            return self.automaton.accepts(())
        return self.automaton.accepts(convolve(words))

    def is_true(self) -> bool:
        return not self.automaton.is_empty()

    def reorder(self, names: Sequence[str]) -> "RelAutomaton":
        names = tuple(names)
        if sorted(names) != sorted(self.varnames):
            raise FormulaError(f"cannot reorder {self.varnames} as {names}")
        if names == self.varnames:
            return self
        order = [self.varnames.index(v) for v in names]
        return RelAutomaton(permute(self.automaton, order), names, self.domain)


def _truth(value: bool) -> Dfa:
    return Dfa.from_words([()] if value else [], ())


# ---------------------------------------------------------------------------
# syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: object


@dataclass(frozen=True)
class Const:
    value: bool


_TOKEN = re.compile(r"\s*(?:(\w+)|(.))")
_OPS = {"∧": "&", "∨": "|", "¬": "~", "!": "~", "∃": "exists", "∀": "forall", "{": "(", "}": ")"}


def _tokens(text: str) -> list:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        word, sym = m.groups()
        pos = m.end()
        tok = word if word is not None else sym
        tok = _OPS.get(tok, tok)
        if tok in ("and", "or", "not"):
            tok = {"and": "&", "or": "|", "not": "~"}[tok]
        out.append(tok)
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise FormulaError(f"expected {expected or 'a token'} at token {self.i}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        f = self.disj()
        if self.peek() is not None:
            raise FormulaError(f"unexpected {self.peek()!r} at token {self.i}")
        return f

    def disj(self):
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def _names(self):
        names = [self.take()]
        while self.peek() == ",":
            self.take()
            names.append(self.take())
        for n in names:
            if not n.isidentifier():
                raise FormulaError(f"bad variable name {n!r}")
        return tuple(names)

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("exists", "forall"):
            self.take()
            names = self._names()
            body = self.unary()
            if tok == "exists":
                return Exists(names, body)
            return Not(Exists(names, Not(body)))
        if tok == "(":
            self.take()
            f = self.disj()
            self.take(")")
            return f
        if tok in ("true", "false"):
            self.take()
            return Const(tok == "true")
        name = self.take()
        if not name.isidentifier():
            raise FormulaError(f"unexpected {name!r}")
        self.take("(")
        args = self._names() if self.peek() != ")" else ()
        self.take(")")
        return Atom(name, args)


def parse_formula(text: str):
    return _Parser(text).parse()


def free_vars(f, consts=frozenset()) -> tuple:
    """Free variables in order of first appearance."""
    out: list = []

    def walk(g, bound):
        if isinstance(g, Atom):
            for a in g.args:
                if a not in bound and a not in consts and a not in out:
                    out.append(a)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, Exists):
            walk(g.body, bound | set(g.vars))

    walk(f, set())
    return tuple(out)


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------


class _Compiler:
    def __init__(self, env: dict, domain: Dfa, consts: dict):
        self.env = env
        self.domain = domain
        self.dom1 = as_tracks(domain)
        self.consts = {k: tuple(v) for k, v in consts.items()}
        self.fresh = 0
        self.bound_env: dict = {}

    def new_name(self, hint: str) -> str:
        self.fresh += 1
        return f"_{hint}{self.fresh}"

    # -- primitives over (Dfa, names) -------------------------------------

    def conj(self, a, b):
        (da, va), (db, vb) = a, b
        if not va:
            return (db, vb) if da.accepts(()) else self.false(vb)
        if not vb:
            return (da, va) if db.accepts(()) else self.false(va)
        d, names = join(da, va, db, vb)
        return d, names

    def false(self, names):
        if not names:
            return _truth(False), ()
        return Dfa.empty(self.domain_tuples(names).alphabet), tuple(names)

    def domain_tuples(self, names) -> Dfa:
        return tuple_language([self.domain] * len(names))

    def exists(self, a, v):
        d, names = a
        if v not in names:
            return a
        if len(names) == 1:
            return _truth(not d.is_empty()), ()
        i = names.index(v)
        return project(d, i), names[:i] + names[i + 1:]

    def cylindrify(self, a, names):
        d, va = a
        for v in names:
            if v not in va:
                if not va:
                    d, va = (self.domain_tuples((v,)) if d.accepts(()) else self.false((v,))[0]), (v,)
                else:
                    d, va = join(d, va, self.dom1, (v,))
        return d, va

    def align(self, a, names):
        d, va = a
        if va == tuple(names):
            return d
        return permute(d, [va.index(v) for v in names])

    # -- formula nodes -----------------------------------------------------

    def atom(self, f: Atom):
        if f.rel not in self.env:
            raise FormulaError(f"unbound relation {f.rel!r}")
        rel = self.relation(f.rel)
        k = len(rel.varnames)
        if len(f.args) != k:
            raise FormulaError(f"{f.rel} has arity {k}, used with {len(f.args)} arguments")
        names = []
        pending = []  # (track name, constant or repeated variable)
        for a in f.args:
            if a in self.consts:
                t = self.new_name("c")
                names.append(t)
                pending.append((t, ("const", a)))
            elif a in names:
                t = self.new_name(a)
                names.append(t)
                pending.append((t, ("same", a)))
            else:
                names.append(a)
        cur = (rel.automaton, tuple(names))
        for t, (kind, a) in pending:
            if kind == "const":
                word = self.consts[a]
                single = as_tracks(Dfa.from_words([word], merge_alphabets(self.domain.alphabet, word)))
                cur = join(cur[0], cur[1], single, (t,))
            else:
                cur = join(cur[0], cur[1], identity_relation(self.domain), (a, t))
            cur = self.exists(cur, t)
        return cur

    def relation(self, name: str) -> RelAutomaton:
        """Environment relation restricted so every track lies in the domain."""
        if name not in self.bound_env:
            rel = self.env[name]
            if not isinstance(rel, RelAutomaton):
                rel = RelAutomaton(rel, tuple(f"x{i}" for i in range(_arity(rel))), self.domain)
            d, names = rel.automaton, rel.varnames
            if not (rel.domain is self.domain or rel.domain.same_language(self.domain)):
                for v in names:
                    d, _ = join(d, names, self.dom1, (v,))
            self.bound_env[name] = RelAutomaton(d, names, self.domain)
        return self.bound_env[name]

    def compile(self, f):
        if isinstance(f, Const):
            return _truth(f.value), ()
        if isinstance(f, Atom):
            return self.atom(f)
        if isinstance(f, And):
            return self.join_all([self.compile(p) for p in f.parts], ())
        if isinstance(f, Or):
            parts = [self.compile(p) for p in f.parts]
            names = []
            for _, vs in parts:
                names += [v for v in vs if v not in names]
            names = tuple(names)
            if not names:
                return _truth(any(d.accepts(()) for d, _ in parts)), ()
            out = None
            for p in parts:
                d = self.align(self.cylindrify(p, names), names)
                out = d if out is None else union_rel(out, d)
            return out.minimize(), names
        if isinstance(f, Not):
            d, names = self.compile(f.body)
            if not names:
                return _truth(not d.accepts(())), ()
            dom = self.domain_tuples(names)
            alpha = merge_alphabets(dom.alphabet, d.alphabet)
            return difference(dom.with_alphabet(alpha), d.with_alphabet(alpha)).minimize(), names
        if isinstance(f, Exists):
            body = f.body
            if isinstance(body, And):
                return self.join_all([self.compile(p) for p in body.parts], f.vars)
            cur = self.compile(body)
            for v in f.vars:
                cur = self.exists(cur, v)
            return cur
        raise FormulaError(f"unknown formula node {f!r}")

    def join_all(self, parts: list, quantified: tuple):
        """Join conjuncts, eliminating quantified variables as early as possible."""
        parts = list(parts)
        todo = [v for v in quantified]
        # variables quantified but absent: vacuous if the domain is nonempty
        while todo:
            def cost(v):
                touching = [p for p in parts if v in p[1]]
                names = set()
                for _, vs in touching:
                    names |= set(vs)
                return (len(names), len(touching), quantified.index(v))

            v = min(todo, key=cost)
            todo.remove(v)
            touching = [p for p in parts if v in p[1]]
            if not touching:
                continue
            parts = [p for p in parts if v not in p[1]]
            cur = touching[0]
            for p in touching[1:]:
                cur = self.conj(cur, p)
            parts.append(self.exists(cur, v))
        if not parts:
            return _truth(True), ()
        cur = parts[0]
        for p in parts[1:]:
            cur = self.conj(cur, p)
        return cur


def _arity(d: Dfa) -> int:
    if not d.alphabet:
        raise FormulaError("relation automaton has no symbols")
    s = d.alphabet[0]
    if not isinstance(s, tuple):
        raise FormulaError("relation automata read tuples of letters")
    return len(s)


def eval_formula(formula, env: dict, domain: Dfa, consts: dict | None = None) -> RelAutomaton:
    """Relation of all satisfying assignments within ``domain``.

    ``formula`` is text or a parsed tree; ``env`` maps relation names to
    :class:`RelAutomaton` (or bare relation Dfas); ``consts`` maps
    constant names to words of the domain.  Output tracks follow the
    order in which the free variables first appear.
    """
    consts = dict(consts or {})
    f = parse_formula(formula) if isinstance(formula, str) else formula
    for c, w in consts.items():
        if not domain.accepts(tuple(w)):
            raise FormulaError(f"constant {c!r} is not in the domain")
    comp = _Compiler(env, domain, consts)
    d, names = comp.compile(f)
    want = free_vars(f, frozenset(consts))
    if tuple(names) != want:
        if sorted(names) != sorted(want):
            raise AutomatonError(f"compiled variables {names} differ from free variables {want}")
        d = comp.align((d, tuple(names)), want)
    return RelAutomaton(d.minimize() if want else d, want, domain)


# ---------------------------------------------------------------------------
# Heisenberg relations
# ---------------------------------------------------------------------------

T_MATRIX = ((1, 0), (1, 1))
P1_MATRIX = ((1, 0), (0, 0))
P2_MATRIX = ((0, 0), (0, 1))

ETA = (
    "exists r,s1,s2,t1,t2,t3 ("
    "R1(r,a) & (R0(b,s1) & R2(s1,s2) & R2(r,s2)) & (R0(r,t1) & R2(t1,t2)) & "
    "(R2(c,w0) & R0(c,t3) & R2(t3,t2)))"
)


@dataclass(frozen=True)
class HeisenbergRelations:
    R0: RelAutomaton
    R1: RelAutomaton
    R2: RelAutomaton
    w0: tuple
    L_H: Dfa
    L_H1: Dfa
    L_H2: Dfa

    def env(self) -> dict:
        return {"R0": self.R0, "R1": self.R1, "R2": self.R2}


def encode_h(x: int, z: int) -> tuple:
    """Word of the normal subgroup element (x, z) (its unary part is empty)."""
    return enc.letters_of((x, z))


def build_heisenberg_relations(rep=None) -> HeisenbergRelations:
    """Endomorphism relations on the normal subgroup Z^2 of H3."""
    if rep is not None and rep.codec.get("rep") != "heisenberg":
        raise FormulaError("the relations are defined for the built-in Heisenberg representation")
    L_H = enc.validity_automaton(2)

    def rel(M):
        return RelAutomaton(enc.linear_map_automaton(M), ("x", "y"), L_H)

    R0, R1, R2 = rel(T_MATRIX), rel(P1_MATRIX), rel(P2_MATRIX)
    w0 = encode_h(0, 0)
    L_H1 = _image_language(R2, w0, L_H)
    L_H2 = _image_language(R1, w0, L_H)
    return HeisenbergRelations(R0, R1, R2, w0, L_H, L_H1, L_H2)


def _image_language(R: RelAutomaton, w0, domain: Dfa) -> Dfa:
    """{u : R(u, w0)} as a plain language."""
    return from_tracks(eval_formula("R(u, w0)", {"R": R}, domain, {"w0": w0}).automaton)


def eta_addition(rels: HeisenbergRelations | None = None) -> RelAutomaton:
    """The ternary relation defined by the formula on (a, b) in L_H1."""
    rels = rels or build_heisenberg_relations()
    env = rels.env()
    env["LH1"] = RelAutomaton(as_tracks(rels.L_H1), ("x",), rels.L_H)
    return eval_formula(f"({ETA}) & LH1(a) & LH1(b)", env, rels.L_H, {"w0": rels.w0})
