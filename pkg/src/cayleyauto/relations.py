"""Relation algebra on multi-track automata.

A relation automaton reads tuples of letters (one component per track,
``PAD`` once a track has ended).  ``join`` is the workhorse: it takes two
automata over named tracks and builds the automaton over the union of the
names that accepts exactly the consistent pairs of accepted tuples.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .automata import (
    PAD,
    AutomatonError,
    Dfa,
    Nfa,
    atom_ranks,
    merge_alphabets,
    project,
    relabel,
    sort_symbols,
)

_DONE = -2


def as_tracks(lang: Dfa) -> Dfa:
    """One-track relation automaton (letters wrapped in 1-tuples)."""
    return Dfa(tuple((s,) for s in lang.alphabet), lang.table, lang.start, lang.accepting)


def from_tracks(rel: Dfa) -> Dfa:
    if any(len(s) != 1 for s in rel.alphabet):
        raise AutomatonError("not a one-track automaton")
    return Dfa(tuple(s[0] for s in rel.alphabet), rel.table, rel.start, rel.accepting)


def arity(rel: Dfa) -> int:
    if not rel.alphabet:
        raise AutomatonError("cannot infer the arity of an automaton without symbols")
    return len(rel.alphabet[0])


def _options(d: Dfa, q: int, k: int):
    """(symbol, next) moves from q, plus the pad move into the DONE state."""
    out = []
    if q != _DONE:
        row = d.table[q]
        for j in np.nonzero(row >= 0)[0].tolist():
            out.append((d.alphabet[j], int(row[j])))
    if q == _DONE or d.accepting[q]:
        out.append(((PAD,) * k, _DONE))
    return out


def join(a: Dfa, va: Sequence[str], b: Dfa, vb: Sequence[str]) -> tuple[Dfa, tuple]:
    """Natural join of two relation automata over named tracks."""
    va, vb = tuple(va), tuple(vb)
    if len(set(va)) != len(va) or len(set(vb)) != len(vb):
        raise AutomatonError("track names must be distinct")
    names = va + tuple(v for v in vb if v not in va)
    shared_a = [va.index(v) for v in vb if v in va]
    shared_b = [vb.index(v) for v in vb if v in va]
    extra_b = [i for i, v in enumerate(vb) if v not in va]
    ka, kb = len(va), len(vb)

    def accepting(q, d):
        return q == _DONE or bool(d.accepting[q])

    ids = {(a.start, b.start): 0}
    queue = [(a.start, b.start)]
    trans = []
    head = 0
    while head < len(queue):
        qa, qb = queue[head]
        p = head
        head += 1
        by_key: dict = {}
        for sb, nb in _options(b, qb, kb):
            by_key.setdefault(tuple(sb[i] for i in shared_b), []).append((sb, nb))
        for sa, na in _options(a, qa, ka):
            for sb, nb in by_key.get(tuple(sa[i] for i in shared_a), ()):
                sym = tuple(sa) + tuple(sb[i] for i in extra_b)
                if all(c == PAD for c in sym):
                    continue
                key = (na, nb)
                if key not in ids:
                    ids[key] = len(queue)
                    queue.append(key)
                trans.append((p, sym, ids[key]))
    acc = [i for i, (qa, qb) in enumerate(queue) if accepting(qa, a) and accepting(qb, b)]
    alphabet = sort_symbols({s for _, s, _ in trans}, atom_ranks(a.alphabet, b.alphabet))
    return Dfa.from_transitions(alphabet, len(queue), 0, acc, trans).minimize(), names


def permute(rel: Dfa, order: Sequence[int]) -> Dfa:
    """Reorder tracks: new track i is old track ``order[i]``."""
    order = tuple(order)

    def mapping(s):
        return tuple(s[i] for i in order)

    ranks = atom_ranks(rel.alphabet)
    new = sort_symbols((mapping(s) for s in rel.alphabet), ranks)
    index = {s: i for i, s in enumerate(new)}
    table = np.full((rel.n_states, len(new)), -1, dtype=np.int32)
    for j, s in enumerate(rel.alphabet):
        table[:, index[mapping(s)]] = rel.table[:, j]
    return Dfa(new, table, rel.start, rel.accepting)


def transpose(rel: Dfa) -> Dfa:
    return permute(rel, (1, 0))


def identity_relation(lang: Dfa) -> Dfa:
    """{(w, w) : w in lang}."""
    return Dfa(tuple((s, s) for s in lang.alphabet), lang.table, lang.start, lang.accepting).minimize()


def tuple_language(langs: Sequence[Dfa]) -> Dfa:
    """Convolutions w1 x ... x wk with wi in langs[i]."""
    names = [f"v{i}" for i in range(len(langs))]
    acc, vs = as_tracks(langs[0]), (names[0],)
    for name, lang in zip(names[1:], langs[1:]):
        acc, vs = join(acc, vs, as_tracks(lang), (name,))
    return acc


def restrict(rel: Dfa, left: Dfa | None = None, right: Dfa | None = None) -> Dfa:
    """Keep pairs whose left (right) word lies in the given language."""
    out = rel
    if left is not None:
        out, _ = join(out, ("x", "y"), as_tracks(left), ("x",))
    if right is not None:
        out, _ = join(out, ("x", "y"), as_tracks(right), ("y",))
    return out


def compose(r: Dfa, s: Dfa) -> Dfa:
    """{(x, z) : exists y with (x, y) in r and (y, z) in s}."""
    j, names = join(r, ("x", "y"), s, ("y", "z"))
    return project(j, names.index("y"))


def union_rel(a: Dfa, b: Dfa) -> Dfa:
    from .automata import union

    alphabet = merge_alphabets(a.alphabet, b.alphabet)
    ranks = atom_ranks(alphabet)
    alphabet = sort_symbols(alphabet, ranks)
    return union(a.with_alphabet(alphabet), b.with_alphabet(alphabet))


def max_padding_tail(rel: Dfa) -> int | None:
    """Longest run of symbols containing padding in an accepted word.

    For a two-track relation this is the largest length difference between
    related words; ``None`` means unbounded.
    """
    t = rel.trim()
    if not t.accepting.any():
        return 0
    padcol = np.array([PAD in s for s in t.alphabet], dtype=np.bool_)
    n = t.n_states
    succ = [[int(q) for q in t.table[p][padcol] if q >= 0] for p in range(n)]
    best = [None] * n
    state = [0] * n  # 0 new, 1 on stack, 2 done

    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(succ[root]))]
        state[root] = 1
        while stack:
            p, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                state[p] = 2
                vals = [best[q] + 1 for q in succ[p] if best[q] is not None]
                if t.accepting[p]:
                    vals.append(0)
                best[p] = max(vals) if vals else None
                continue
            if state[nxt] == 1:
                return None
            if state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
    return max((b for b in best if b is not None), default=0)


# ---------------------------------------------------------------------------
# asynchronous transducers
# ---------------------------------------------------------------------------


class Transducer:
    """Nondeterministic automaton with string-pair labels.

    Used only as a construction device: ``to_sync`` turns it into a
    synchronous two-track automaton, accepting the pairs that admit an
    accepting run whose read-ahead stays within ``lag`` letters per track.
    """

    def __init__(self):
        self.n_states = 0
        self.starts: set = set()
        self.finals: set = set()
        self.edges: list = []

    def add_state(self) -> int:
        self.n_states += 1
        return self.n_states - 1

    def add(self, p: int, x, y, q: int) -> None:
        self.edges.append((p, tuple(x), tuple(y), q))

    @classmethod
    def pair(cls, x, y) -> "Transducer":
        t = cls()
        p, q = t.add_state(), t.add_state()
        t.starts, t.finals = {p}, {q}
        t.add(p, x, y, q)
        return t

    @classmethod
    def epsilon(cls) -> "Transducer":
        return cls.pair((), ())

    @classmethod
    def copy(cls, letters) -> "Transducer":
        """One letter copied to both tracks."""
        t = cls()
        p, q = t.add_state(), t.add_state()
        t.starts, t.finals = {p}, {q}
        for a in letters:
            t.add(p, (a,), (a,), q)
        return t

    @classmethod
    def from_sync(cls, rel: Dfa) -> "Transducer":
        t = cls()
        t.n_states = rel.n_states
        t.starts = {rel.start}
        t.finals = set(np.nonzero(rel.accepting)[0].tolist())
        for p, (a, b), q in rel.transitions():
            t.add(p, () if a == PAD else (a,), () if b == PAD else (b,), q)
        return t

    def _embed(self, other: "Transducer") -> int:
        off = self.n_states
        self.n_states += other.n_states
        for p, x, y, q in other.edges:
            self.edges.append((p + off, x, y, q + off))
        return off

    def copy_of(self) -> "Transducer":
        t = Transducer()
        t._embed(self)
        t.starts, t.finals = set(self.starts), set(self.finals)
        return t

    def concat(self, *others: "Transducer") -> "Transducer":
        out = self.copy_of()
        for other in others:
            off = out._embed(other)
            for f in out.finals:
                for s in other.starts:
                    out.add(f, (), (), s + off)
            out.finals = {q + off for q in other.finals}
        return out

    def __add__(self, other: "Transducer") -> "Transducer":
        return self.concat(other)

    def union(self, *others: "Transducer") -> "Transducer":
        out = self.copy_of()
        for other in others:
            off = out._embed(other)
            out.starts |= {q + off for q in other.starts}
            out.finals |= {q + off for q in other.finals}
        return out

    def __or__(self, other: "Transducer") -> "Transducer":
        return self.union(other)

    def star(self) -> "Transducer":
        out = Transducer()
        s = out.add_state()
        off = out._embed(self)
        out.starts, out.finals = {s}, {s}
        for q in self.starts:
            out.add(s, (), (), q + off)
        for f in self.finals:
            out.add(f + off, (), (), s)
        return out

    def plus(self) -> "Transducer":
        return self.concat(self.star())

    def letters(self) -> tuple[tuple, tuple]:
        xs, ys = [], []
        for _, x, y, _ in self.edges:
            xs.extend(x)
            ys.extend(y)
        return tuple(dict.fromkeys(xs)), tuple(dict.fromkeys(ys))

    def to_sync(self, lag: int = 1, alphabet: Sequence | None = None) -> Dfa:
        """Synchronous two-track automaton of the relation (see class doc)."""
        # edges indexed by state and the first letter (or None) of each label
        out_edges: dict = {}
        for p, x, y, q in self.edges:
            key = (p, x[0] if x else None, y[0] if y else None)
            out_edges.setdefault(key, []).append((x, y, q))
        lx, ly = self.letters()

        # letters that can be consumed next from each state, per track
        def firsts(track: int):
            first = {p: set() for p in range(self.n_states)}
            changed = True
            while changed:
                changed = False
                for p, x, y, q in self.edges:
                    lab = (x, y)[track]
                    add = {lab[0]} if lab else first[q]
                    if not add <= first[p]:
                        first[p] |= add
                        changed = True
            return first

        fx, fy = firsts(0), firsts(1)

        def viable(s):
            # a buffered letter that no path from here can consume is dead
            return (not s[1] or s[1][0] in fx[s[0]]) and (not s[2] or s[2][0] in fy[s[0]])

        memo: dict = {}

        def closure(states):
            key = tuple(states)
            if key in memo:
                return memo[key]
            seen = {s for s in states if viable(s)}
            stack = list(seen)
            while stack:
                p, bx, by, ex, ey = stack.pop()
                for hx in ((None, bx[0]) if bx else (None,)):
                    for hy in ((None, by[0]) if by else (None,)):
                        for x, y, q in out_edges.get((p, hx, hy), ()):
                            if bx[:len(x)] == x and by[:len(y)] == y:
                                s = (q, bx[len(x):], by[len(y):], ex, ey)
                                if s not in seen and viable(s):
                                    seen.add(s)
                                    stack.append(s)
            out = [s for s in seen if len(s[1]) <= lag and len(s[2]) <= lag]
            memo[key] = out
            return out

        nfa = Nfa()
        ids: dict = {}
        queue: list = []

        def sid(s):
            if s not in ids:
                ids[s] = nfa.add_state()
                queue.append(s)
            return ids[s]

        for s in closure([(p, (), (), False, False) for p in self.starts]):
            nfa.starts.add(sid(s))
        symbols = set()
        head = 0
        while head < len(queue):
            cur = queue[head]
            head += 1
            src = ids[cur]
            p, bx, by, ex, ey = cur
            if p in self.finals and not bx and not by:
                nfa.accepting.add(src)
            xs = (PAD,) if ex else lx + (PAD,)
            ys = (PAD,) if ey else ly + (PAD,)
            for a in xs:
                if a != PAD and not (bx or a in fx[p]):
                    continue
                for b in ys:
                    if a == PAD and b == PAD:
                        continue
                    if b != PAD and not (by or b in fy[p]):
                        continue
                    nb = (p, bx + (() if a == PAD else (a,)), by + (() if b == PAD else (b,)),
                          ex or a == PAD, ey or b == PAD)
                    targets = closure([nb])
                    if targets:
                        symbols.add((a, b))
                    for s in targets:
                        nfa.add(src, (a, b), sid(s))
        if alphabet is None:
            alphabet = sort_symbols(symbols, atom_ranks(lx, ly))
        nfa.alphabet = tuple(alphabet)
        if not nfa.alphabet:
            return Dfa.from_words([], ()) if not nfa.accepting else Dfa.from_words([()], ())
        return nfa.determinize()


def seq_relation(*parts: Dfa) -> Dfa:
    """Concatenation of synchronous relations whose parts keep equal lengths.

    Only the last part may pad; earlier parts must relate words of equal
    length (copy-like relations).
    """
    nfa = Nfa.from_dfa(parts[0])
    for p in parts[1:]:
        nfa = nfa.concat(Nfa.from_dfa(p))
    alphabet = sort_symbols(nfa.alphabet, atom_ranks(*[p.alphabet for p in parts]))
    nfa.alphabet = alphabet
    return nfa.determinize()


def copy_relation(letters, star: bool = True) -> Dfa:
    """{(w, w)} for w in letters* (or a single letter)."""
    letters = tuple(letters)
    syms = tuple((a, a) for a in letters)
    if star:
        return Dfa(syms, np.zeros((1, len(syms))), 0, [True])
    return Dfa(syms, np.array([[1] * len(syms), [-1] * len(syms)]), 0, [False, True])
