"""Finite automata over plain and convolution (tuple) alphabets.

Words are tuples of symbols.  A symbol is either an atomic string or a
tuple whose components are symbols or the padding token ``PAD``.  A word
over a tuple alphabet is a *convolution*: every track is a plain word
followed by padding.

``Dfa`` stores a dense ``int32`` transition table (``-1`` is the implicit
sink) together with an ordered alphabet; the order is what enumeration
uses.  ``Nfa`` is a small dictionary-based automaton with epsilon moves,
used as a construction device and always determinized before use.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels

PAD = "~"


class AutomatonError(ValueError):
    pass


class AlphabetMismatch(AutomatonError):
    pass


class CapExceeded(RuntimeError):
    """An enumeration or search would exceed its configured cap."""


class MalformedConvolution(AutomatonError):
    pass


def as_word(w) -> tuple:
    """Normalise a word: strings become tuples of characters."""
    if isinstance(w, str):
        return tuple(w)
    return tuple(w)


# ---------------------------------------------------------------------------
# symbol order
# ---------------------------------------------------------------------------


def atom_ranks(*alphabets: Iterable) -> dict:
    """Rank atomic symbols by first appearance across ``alphabets``."""
    ranks: dict = {}

    def visit(sym):
        if isinstance(sym, tuple):
            for c in sym:
                visit(c)
        elif sym != PAD and sym not in ranks:
            ranks[sym] = len(ranks)

    for alphabet in alphabets:
        for sym in alphabet:
            visit(sym)
    return ranks


def symbol_key(sym, ranks: dict):
    if isinstance(sym, tuple):
        return (1, 0, tuple(symbol_key(c, ranks) for c in sym))
    if sym == PAD:
        return (2, 0, ())
    return (0, ranks.get(sym, len(ranks)), (sym,))


def sort_symbols(symbols: Iterable, ranks: dict) -> tuple:
    return tuple(sorted(set(symbols), key=lambda s: symbol_key(s, ranks)))


def conv_alphabet(base: Sequence, k: int) -> tuple:
    """All ``k``-tuples over ``base`` plus padding, minus the all-pad tuple."""
    base = tuple(base)
    if PAD in base:
        raise AutomatonError("padding token may not be a base symbol")
    ranks = atom_ranks(base)
    syms = [t for t in itertools.product(base + (PAD,), repeat=k) if any(c != PAD for c in t)]
    return sort_symbols(syms, ranks)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


def convolve(words: Sequence) -> tuple:
    """Convolution of a tuple of words, padding shorter tracks with ``PAD``."""
    words = [as_word(w) for w in words]
    if not words:
        raise AutomatonError("convolution needs at least one track")
    m = max(len(w) for w in words)
    return tuple(tuple(w[i] if i < len(w) else PAD for w in words) for i in range(m))


def deconvolve(cw: Sequence, tracks: int | None = None) -> tuple:
    """Inverse of :func:`convolve`.

    ``tracks`` is required for the empty convolution word (default 2).
    """
    cw = tuple(cw)
    if not cw:
        return ((),) * (2 if tracks is None else tracks)
    k = len(cw[0]) if isinstance(cw[0], tuple) else -1
    if tracks is not None and tracks != k:
        raise MalformedConvolution(f"expected {tracks} tracks, got {k}")
    for pos, sym in enumerate(cw):
        if not isinstance(sym, tuple) or len(sym) != k:
            raise MalformedConvolution(f"symbol {sym!r} at {pos} is not a {k}-tuple")
    n = len(cw)
    out = []
    longest = 0
    for i, col in enumerate(zip(*cw)):
        try:
            end = col.index(PAD)
        except ValueError:
            end = n
        if col.count(PAD) != n - end:
            raise MalformedConvolution(f"padding inside track {i + 1}")
        out.append(col[:end])
        longest = max(longest, end)
    if longest < n:
        raise MalformedConvolution(f"all-padding symbol at position {longest}")
    return tuple(out)


def padding_ok(cw: Sequence) -> bool:
    try:
        deconvolve(cw)
    except MalformedConvolution:
        return False
    return True


# ---------------------------------------------------------------------------
# Dfa
# ---------------------------------------------------------------------------


class Dfa:
    """Deterministic automaton with a dense table; ``-1`` is the sink."""

    __slots__ = ("alphabet", "table", "start", "accepting", "_index")

    def __init__(self, alphabet: Sequence, table, start: int, accepting):
        alphabet = tuple(alphabet)
        accepting = np.asarray(accepting, dtype=np.bool_)
        table = np.asarray(table, dtype=np.int32).reshape(accepting.shape[0] if not alphabet else -1, len(alphabet))
        if table.shape[0] != accepting.shape[0]:
            raise AutomatonError("table and accepting vector disagree on state count")
        if table.shape[0] == 0:
            raise AutomatonError("a Dfa needs at least one state")
        if not 0 <= start < table.shape[0]:
            raise AutomatonError(f"start state {start} out of range")
        if table.size and (table.max() >= table.shape[0] or table.min() < -1):
            raise AutomatonError("transition target out of range")
        index = {s: i for i, s in enumerate(alphabet)}
        if len(index) != len(alphabet):
            raise AutomatonError("duplicate symbols in alphabet")
        table.setflags(write=False)
        accepting.setflags(write=False)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "accepting", accepting)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("Dfa is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_transitions(cls, alphabet, n_states, start, accepting, transitions) -> "Dfa":
        alphabet = tuple(alphabet)
        index = {s: i for i, s in enumerate(alphabet)}
        table = np.full((n_states, len(alphabet)), -1, dtype=np.int32)
        for p, sym, q in transitions:
            j = index[sym]
            if table[p, j] not in (-1, q):
                raise AutomatonError(f"nondeterministic transition from {p} on {sym!r}")
            table[p, j] = q
        acc = np.zeros(n_states, dtype=np.bool_)
        acc[list(accepting)] = True
        return cls(alphabet, table, start, acc)

    @classmethod
    def empty(cls, alphabet) -> "Dfa":
        alphabet = tuple(alphabet)
        return cls(alphabet, np.full((1, len(alphabet)), -1), 0, [False])

    @classmethod
    def universal(cls, alphabet) -> "Dfa":
        alphabet = tuple(alphabet)
        return cls(alphabet, np.zeros((1, len(alphabet))), 0, [True])

    @classmethod
    def from_words(cls, words: Iterable, alphabet) -> "Dfa":
        nfa = Nfa(alphabet)
        s = nfa.add_state()
        nfa.starts.add(s)
        for w in words:
            q = s
            for sym in as_word(w):
                r = nfa.add_state()
                nfa.add(q, sym, r)
                q = r
            nfa.accepting.add(q)
        return nfa.determinize()

    # -- queries ----------------------------------------------------------

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    def index_of(self, sym) -> int:
        try:
            return self._index[sym]
        except KeyError:
            raise AutomatonError(f"symbol {sym!r} not in alphabet") from None

    def delta(self, q: int, sym) -> int:
        j = self._index.get(sym)
        if j is None or q < 0:
            return -1
        return int(self.table[q, j])

    def run(self, word) -> int:
        q = self.start
        for sym in as_word(word):
            q = self.delta(q, sym)
            if q < 0:
                return -1
        return q

    def accepts(self, word) -> bool:
        q = self.run(word)
        return q >= 0 and bool(self.accepting[q])

    def accepts_many(self, words: Sequence) -> np.ndarray:
        """Batch membership through the table kernel."""
        words = [as_word(w) for w in words]
        n = len(words)
        maxlen = max((len(w) for w in words), default=0)
        enc = np.zeros((n, maxlen), dtype=np.int32)
        lengths = np.zeros(n, dtype=np.int64)
        unknown = np.zeros(n, dtype=np.bool_)
        for i, w in enumerate(words):
            lengths[i] = len(w)
            for j, sym in enumerate(w):
                k = self._index.get(sym)
                if k is None:
                    unknown[i] = True
                    lengths[i] = 0
                    break
                enc[i, j] = k
        final = _kernels.run_words(self.table, self.start, enc, lengths)
        out = np.zeros(n, dtype=np.bool_)
        ok = (final >= 0) & ~unknown
        out[ok] = self.accepting[final[ok]]
        return out

    def transitions(self) -> Iterator[tuple]:
        src, col = np.nonzero(self.table >= 0)
        for p, j in zip(src.tolist(), col.tolist()):
            yield p, self.alphabet[j], int(self.table[p, j])

    def used_symbols(self) -> tuple:
        cols = np.nonzero((self.table >= 0).any(axis=0))[0]
        return tuple(self.alphabet[j] for j in cols)

    # -- structural operations -------------------------------------------

    def reachable(self) -> "Dfa":
        order = _kernels.bfs_order(self.table, self.start)
        keep = np.nonzero(order >= 0)[0]
        if keep.size == self.n_states and np.array_equal(order, np.arange(self.n_states)):
            return self
        return self._restrict(keep[np.argsort(order[keep])])

    def _restrict(self, keep: np.ndarray) -> "Dfa":
        remap = np.full(self.n_states + 1, -1, dtype=np.int32)
        remap[keep] = np.arange(keep.size, dtype=np.int32)
        sub = self.table[keep]
        table = np.where(sub >= 0, remap[sub], -1)
        return Dfa(self.alphabet, table, int(remap[self.start]), self.accepting[keep])

    def coreachable_mask(self) -> np.ndarray:
        n = self.n_states
        good = self.accepting.copy()
        src, col = np.nonzero(self.table >= 0)
        dst = self.table[src, col]
        changed = True
        while changed:
            new = good.copy()
            new[src[good[dst]]] = True
            changed = bool((new != good).any())
            good = new
        return good

    def trim(self) -> "Dfa":
        """Restrict to states that are reachable and co-reachable."""
        d = self.reachable()
        good = d.coreachable_mask()
        if not good[d.start]:
            return Dfa.empty(d.alphabet)
        if good.all():
            return d
        keep = np.nonzero(good)[0]
        table = np.where(d.table >= 0, d.table, d.n_states)
        table = np.where(np.append(good, False)[table], d.table, -1)
        return Dfa(d.alphabet, table, d.start, d.accepting)._restrict(keep).reachable()

    def minimize(self) -> "Dfa":
        """Minimal trimmed Dfa with canonical (BFS) state numbering."""
        d = self.trim()
        if d.n_states == 0:
            return Dfa.empty(self.alphabet)
        n, m = d.table.shape
        total = np.vstack([np.where(d.table >= 0, d.table, n), np.full((1, m), n)]).astype(np.int32)
        acc = np.append(d.accepting, False)
        cls = _kernels.refine(total, acc)
        sink = cls[n]
        if cls[d.start] == sink:
            return Dfa.empty(d.alphabet)
        k = int(cls.max()) + 1
        reps = np.full(k, -1, dtype=np.int64)
        for q in range(n, -1, -1):
            reps[cls[q]] = q
        qtable = cls[total[reps]]
        qtable = np.where(qtable == sink, -1, qtable).astype(np.int32)
        qacc = acc[reps]
        keep = np.array([c for c in range(k) if c != sink], dtype=np.int64)
        remap = np.full(k, -1, dtype=np.int32)
        remap[keep] = np.arange(keep.size, dtype=np.int32)
        qtable = np.where(qtable >= 0, remap[qtable], -1)[keep]
        out = Dfa(d.alphabet, qtable, int(remap[cls[d.start]]), qacc[keep])
        return out.canonical()

    def canonical(self) -> "Dfa":
        order = _kernels.bfs_order(self.table, self.start)
        keep = np.nonzero(order >= 0)[0]
        return self._restrict(keep[np.argsort(order[keep])])

    def complete(self) -> "Dfa":
        """Total automaton with an explicit sink state (if needed)."""
        if (self.table >= 0).all():
            return self
        n, m = self.table.shape
        table = np.vstack([np.where(self.table >= 0, self.table, n), np.full((1, m), n)])
        return Dfa(self.alphabet, table, self.start, np.append(self.accepting, False))

    def complement(self) -> "Dfa":
        d = self.complete()
        return Dfa(d.alphabet, d.table, d.start, ~d.accepting).minimize()

    def with_alphabet(self, alphabet: Sequence) -> "Dfa":
        """Re-index over a superset alphabet (new symbols go to the sink)."""
        alphabet = tuple(alphabet)
        if alphabet == self.alphabet:
            return self
        index = {s: i for i, s in enumerate(alphabet)}
        missing = [s for s in self.alphabet if s not in index]
        if missing:
            raise AlphabetMismatch(f"symbols {missing[:3]!r} missing from the new alphabet")
        table = np.full((self.n_states, len(alphabet)), -1, dtype=np.int32)
        for j, s in enumerate(self.alphabet):
            table[:, index[s]] = self.table[:, j]
        return Dfa(alphabet, table, self.start, self.accepting)

    def is_empty(self) -> bool:
        return not self.trim().accepting.any()

    def accepts_empty(self) -> bool:
        return bool(self.accepting[self.start])

    def same_language(self, other: "Dfa") -> bool:
        alphabet = merge_alphabets(self.alphabet, other.alphabet)
        a = self.with_alphabet(alphabet)
        b = other.with_alphabet(alphabet)
        return combine(a, b, "difference").is_empty() and combine(b, a, "difference").is_empty()

    def __repr__(self):
        return f"Dfa(states={self.n_states}, symbols={len(self.alphabet)}, accepting={int(self.accepting.sum())})"

    # -- exchange format --------------------------------------------------

    def to_json(self) -> dict:
        return {
            "alphabet": [_sym_to_json(s) for s in self.alphabet],
            "states": self.n_states,
            "initial": [self.start],
            "accepting": [int(q) for q in np.nonzero(self.accepting)[0]],
            "transitions": [[p, _sym_to_json(s), q] for p, s, q in self.transitions()],
        }


def merge_alphabets(*alphabets: Sequence) -> tuple:
    """Union of alphabets: the first one's order, then new symbols in order."""
    out = list(alphabets[0])
    seen = set(out)
    for alphabet in alphabets[1:]:
        for s in alphabet:
            if s not in seen:
                seen.add(s)
                out.append(s)
    return tuple(out)


# ---------------------------------------------------------------------------
# Nfa
# ---------------------------------------------------------------------------


class Nfa:
    """Mutable construction helper: states are ints, ``None`` labels epsilon."""

    def __init__(self, alphabet: Sequence = ()):
        self.alphabet = tuple(alphabet)
        self.n_states = 0
        self.starts: set = set()
        self.accepting: set = set()
        self.trans: dict = {}

    def add_state(self) -> int:
        self.n_states += 1
        return self.n_states - 1

    def add(self, p: int, sym, q: int) -> None:
        self.trans.setdefault(p, {}).setdefault(sym, set()).add(q)

    # -- combinators ------------------------------------------------------

    @classmethod
    def from_dfa(cls, d: Dfa) -> "Nfa":
        n = cls(d.alphabet)
        n.n_states = d.n_states
        n.starts = {d.start}
        n.accepting = set(np.nonzero(d.accepting)[0].tolist())
        for p, s, q in d.transitions():
            n.add(p, s, q)
        return n

    @classmethod
    def literal(cls, word, alphabet=None) -> "Nfa":
        word = as_word(word)
        n = cls(alphabet if alphabet is not None else sort_symbols(word, atom_ranks(word)))
        q = n.add_state()
        n.starts.add(q)
        for sym in word:
            r = n.add_state()
            n.add(q, sym, r)
            q = r
        n.accepting.add(q)
        return n

    @classmethod
    def any_of(cls, symbols, alphabet=None) -> "Nfa":
        symbols = tuple(symbols)
        n = cls(alphabet if alphabet is not None else symbols)
        p, q = n.add_state(), n.add_state()
        n.starts.add(p)
        n.accepting.add(q)
        for s in symbols:
            n.add(p, s, q)
        return n

    def _embed(self, other: "Nfa") -> int:
        off = self.n_states
        self.n_states += other.n_states
        for p, row in other.trans.items():
            for s, qs in row.items():
                for q in qs:
                    self.add(p + off, s, q + off)
        return off

    def copy(self) -> "Nfa":
        n = Nfa(self.alphabet)
        n._embed(self)
        n.starts = set(self.starts)
        n.accepting = set(self.accepting)
        return n

    def concat(self, *others: "Nfa") -> "Nfa":
        out = self.copy()
        for other in others:
            out.alphabet = merge_alphabets(out.alphabet, other.alphabet)
            off = out._embed(other)
            for a in out.accepting:
                for s in other.starts:
                    out.add(a, None, s + off)
            out.accepting = {q + off for q in other.accepting}
        return out

    def union(self, *others: "Nfa") -> "Nfa":
        out = self.copy()
        for other in others:
            out.alphabet = merge_alphabets(out.alphabet, other.alphabet)
            off = out._embed(other)
            out.starts |= {q + off for q in other.starts}
            out.accepting |= {q + off for q in other.accepting}
        return out

    def star(self) -> "Nfa":
        out = Nfa(self.alphabet)
        s = out.add_state()
        off = out._embed(self)
        out.starts = {s}
        out.accepting = {s}
        for q in self.starts:
            out.add(s, None, q + off)
        for a in self.accepting:
            out.add(a + off, None, s)
        return out

    def plus(self) -> "Nfa":
        return self.concat(self.star())

    # -- determinization --------------------------------------------------

    def _closure(self, states) -> frozenset:
        stack = list(states)
        seen = set(stack)
        while stack:
            p = stack.pop()
            for q in self.trans.get(p, {}).get(None, ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return frozenset(seen)

    def determinize(self, minimize: bool = True) -> Dfa:
        """Subset construction (with epsilon closure), then minimization."""
        alphabet = self.alphabet
        index = {s: i for i, s in enumerate(alphabet)}
        start = self._closure(self.starts)
        ids = {start: 0}
        queue = [start]
        rows = []
        head = 0
        while head < len(queue):
            cur = queue[head]
            head += 1
            moves: dict = {}
            for p in cur:
                for s, qs in self.trans.get(p, {}).items():
                    if s is not None:
                        moves.setdefault(s, set()).update(qs)
            row = {}
            for s, qs in moves.items():
                if s not in index:
                    raise AlphabetMismatch(f"symbol {s!r} not in the declared alphabet")
                tgt = self._closure(qs)
                if tgt not in ids:
                    ids[tgt] = len(queue)
                    queue.append(tgt)
                row[index[s]] = ids[tgt]
            rows.append(row)
        table = np.full((len(queue), len(alphabet)), -1, dtype=np.int32)
        for i, row in enumerate(rows):
            for j, q in row.items():
                table[i, j] = q
        acc = np.array([bool(S & self.accepting) for S in queue], dtype=np.bool_)
        d = Dfa(alphabet, table, 0, acc)
        return d.minimize() if minimize else d


def determinize_minimize(n: Nfa | Dfa) -> Dfa:
    if isinstance(n, Dfa):
        return n.minimize()
    return n.determinize()


# ---------------------------------------------------------------------------
# boolean combinations
# ---------------------------------------------------------------------------

_MODES = ("intersect", "union", "difference")


def combine(a: Dfa, b: Dfa, mode: str) -> Dfa:
    """Product construction; result trimmed and minimized."""
    if mode not in _MODES:
        raise AutomatonError(f"unknown mode {mode!r}")
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch("combine needs identical alphabets")
    ta = a.complete()
    tb = b.complete()
    pairs, table = _kernels.product(ta.table, tb.table, ta.start, tb.start)
    fa = ta.accepting[pairs[:, 0]]
    fb = tb.accepting[pairs[:, 1]]
    if mode == "intersect":
        acc = fa & fb
    elif mode == "union":
        acc = fa | fb
    else:
        acc = fa & ~fb
    return Dfa(a.alphabet, table, 0, acc).minimize()


def intersect(a: Dfa, b: Dfa) -> Dfa:
    return combine(a, b, "intersect")


def union(a: Dfa, b: Dfa) -> Dfa:
    return combine(a, b, "union")


def difference(a: Dfa, b: Dfa) -> Dfa:
    return combine(a, b, "difference")


# ---------------------------------------------------------------------------
# projection and relabelling
# ---------------------------------------------------------------------------


def relabel(d: Dfa, mapping, alphabet=None, drop=None) -> Dfa:
    """Image of ``d`` under a letter-to-letter map.

    ``mapping(sym)`` returns the new symbol; a return value equal to ``drop``
    turns the transition into an epsilon move.
    """
    nfa = Nfa()
    nfa.n_states = d.n_states
    nfa.starts = {d.start}
    nfa.accepting = set(np.nonzero(d.accepting)[0].tolist())
    new_syms = []
    for p, s, q in d.transitions():
        t = mapping(s)
        if drop is not None and t == drop:
            nfa.add(p, None, q)
        else:
            nfa.add(p, t, q)
            new_syms.append(t)
    if alphabet is None:
        alphabet = sort_symbols(new_syms, atom_ranks(d.alphabet))
    nfa.alphabet = tuple(alphabet)
    return nfa.determinize()


def project(r: Dfa, drop: int) -> Dfa:
    """Existentially quantify track ``drop`` (0-based) of a relation automaton.

    Symbols that become all-padding only occur in a suffix; they are treated
    as epsilon moves at the end of the word.
    """
    if not r.alphabet:
        return r
    k = len(r.alphabet[0])
    if k < 2:
        raise AutomatonError("projection needs at least two tracks")
    if not 0 <= drop < k:
        raise AutomatonError(f"track index {drop} out of range for {k} tracks")
    allpad = (PAD,) * (k - 1)

    def mapping(sym):
        return sym[:drop] + sym[drop + 1:]

    ranks = atom_ranks(r.alphabet)
    new = sort_symbols((mapping(s) for s in r.used_symbols() if mapping(s) != allpad), ranks)
    return relabel(r, mapping, alphabet=new, drop=allpad)


def untuple(d: Dfa) -> Dfa:
    """Turn a one-track convolution automaton into a plain one."""
    if any(not isinstance(s, tuple) or len(s) != 1 for s in d.alphabet):
        raise AutomatonError("not a one-track automaton")
    return Dfa(tuple(s[0] for s in d.alphabet), d.table, d.start, d.accepting)


# ---------------------------------------------------------------------------
# enumeration and counting
# ---------------------------------------------------------------------------


def enumerate_upto(d: Dfa, n: int) -> Iterator[tuple]:
    """Accepted words of length <= n in length-then-lexicographic order."""
    if n < 0:
        raise AutomatonError("length bound must be nonnegative")
    live = _kernels.live_steps(d.table, d.accepting, n).tolist()
    alphabet = d.alphabet
    # sparse rows: only defined transitions, in alphabet order
    adj = [[] for _ in range(d.n_states)]
    src, col = np.nonzero(d.table >= 0)
    for p, j, r in zip(src.tolist(), col.tolist(), d.table[src, col].tolist()):
        adj[p].append((alphabet[j], r))
    for length in range(n + 1):
        if not live[length][d.start]:
            continue
        stack = [(d.start, 0, ())]
        # explicit stack keeps lexicographic order: push children reversed
        while stack:
            q, depth, prefix = stack.pop()
            if depth == length:
                yield prefix
                continue
            ok = live[length - depth - 1]
            children = [(r, depth + 1, prefix + (a,)) for a, r in adj[q] if ok[r]]
            stack.extend(reversed(children))


def count_upto(d: Dfa, n: int) -> int:
    return int(sum(count_by_length(d, n)))


def count_by_length(d: Dfa, n: int) -> list:
    """Number of accepted words of each exact length 0..n."""
    if n < 0:
        raise AutomatonError("length bound must be nonnegative")
    m = max(len(d.alphabet), 1)
    if (m ** n) * d.n_states < 2 ** 62:
        return [int(c) for c in _kernels.count_by_length(d.table, d.start, d.accepting, n)]
    # exact big-integer path
    src, col = np.nonzero(d.table >= 0)
    dst = d.table[src, col].tolist()
    src = src.tolist()
    vec = [0] * d.n_states
    vec[d.start] = 1
    acc = np.nonzero(d.accepting)[0].tolist()
    out = [sum(vec[q] for q in acc)]
    for _ in range(n):
        nxt = [0] * d.n_states
        for p, q in zip(src, dst):
            if vec[p]:
                nxt[q] += vec[p]
        vec = nxt
        out.append(sum(vec[q] for q in acc))
    return out


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthClass:
    kind: str  # "polynomial" or "exponential"
    degree: int | None = None

    @property
    def exponential(self) -> bool:
        return self.kind == "exponential"

    def __str__(self):
        return "exponential" if self.exponential else f"polynomial:{self.degree}"


def PolynomialBounded(degree: int) -> GrowthClass:
    return GrowthClass("polynomial", int(degree))


def Exponential() -> GrowthClass:
    return GrowthClass("exponential", None)


def classify_growth(d: Dfa) -> GrowthClass:
    """Polynomial/exponential dichotomy from the cycle structure.

    A trimmed automaton has exponential growth iff some strongly connected
    component carries more internal transitions than states.  Otherwise
    every component is a single simple cycle or acyclic, and the reported
    degree is the longest chain of cyclic components minus one; it bounds
    the polynomial degree of the count of words of length exactly n.
    """
    t = d.trim()
    if not t.accepting.any():
        return PolynomialBounded(0)
    n = t.n_states
    src, col = np.nonzero(t.table >= 0)
    dst = t.table[src, col]
    graph = csr_matrix((np.ones(src.size), (src, dst)), shape=(n, n))
    n_comp, comp = connected_components(graph, directed=True, connection="strong")
    inside = comp[src] == comp[dst]
    edges = np.bincount(comp[src[inside]], minlength=n_comp)
    sizes = np.bincount(comp, minlength=n_comp)
    if (edges > sizes).any():
        return Exponential()
    cyclic = edges > 0
    # longest chain of cyclic components in the condensation DAG
    succ: dict = {}
    for a, b in zip(comp[src[~inside]].tolist(), comp[dst[~inside]].tolist()):
        succ.setdefault(a, set()).add(b)
    best: dict = {}

    def chain(c):
        if c in best:
            return best[c]
        stack = [(c, False)]
        while stack:
            x, done = stack.pop()
            if x in best:
                continue
            if done:
                best[x] = int(cyclic[x]) + max((best[y] for y in succ.get(x, ())), default=0)
            else:
                stack.append((x, True))
                stack.extend((y, False) for y in succ.get(x, ()) if y not in best)
        return best[c]

    longest = chain(int(comp[t.start]))
    return PolynomialBounded(max(longest - 1, 0))


def polynomial_fit_residual(counts: Sequence[int], degree: int = 10) -> int:
    """Last count minus the degree-``degree`` interpolant of the points before it.

    The interpolant runs through the ``degree + 1`` counts preceding the
    last one, so an eventually polynomial sequence of that degree or less
    gives 0 once its transient is over; exponential growth gives a
    positive residual.
    """
    counts = [int(c) for c in counts]
    if len(counts) < degree + 2:
        raise AutomatonError(f"need at least {degree + 2} counts")
    window = counts[-degree - 2:-1]
    diffs = []
    while window:
        diffs.append(window[0])
        window = [b - a for a, b in zip(window, window[1:])]
    predicted = sum(c * math.comb(degree + 1, k) for k, c in enumerate(diffs))
    return counts[-1] - predicted


# ---------------------------------------------------------------------------
# JSON exchange
# ---------------------------------------------------------------------------

_FIELDS = {"alphabet", "states", "initial", "accepting", "transitions"}


def _sym_to_json(sym):
    if isinstance(sym, tuple):
        return [_sym_to_json(c) for c in sym]
    return sym


def _sym_from_json(obj):
    if isinstance(obj, list):
        return tuple(_sym_from_json(c) for c in obj)
    if not isinstance(obj, str):
        raise AutomatonError(f"bad symbol {obj!r}")
    return obj


def automaton_from_json(data: dict) -> Dfa | Nfa:
    """Load the exchange format; deterministic input yields a ``Dfa``."""
    unknown = set(data) - _FIELDS
    if unknown:
        raise AutomatonError(f"unknown fields: {sorted(unknown)}")
    missing = _FIELDS - set(data)
    if missing:
        raise AutomatonError(f"missing fields: {sorted(missing)}")
    alphabet = tuple(_sym_from_json(s) for s in data["alphabet"])
    n = int(data["states"])
    initial = [int(q) for q in data["initial"]]
    trans = [(int(p), _sym_from_json(s), int(q)) for p, s, q in data["transitions"]]
    keys = [(p, s) for p, s, _ in trans]
    if len(initial) == 1 and len(set(keys)) == len(keys):
        return Dfa.from_transitions(alphabet, n, initial[0], data["accepting"], trans)
    nfa = Nfa(alphabet)
    nfa.n_states = n
    nfa.starts = set(initial)
    nfa.accepting = set(int(q) for q in data["accepting"])
    for p, s, q in trans:
        nfa.add(p, s, q)
    return nfa


def load_dfa(path) -> Dfa:
    with open(path) as fh:
        a = automaton_from_json(json.load(fh))
    return a if isinstance(a, Dfa) else a.determinize()


def save_dfa(d: Dfa, path) -> None:
    with open(path, "w") as fh:
        json.dump(d.to_json(), fh, ensure_ascii=False)
