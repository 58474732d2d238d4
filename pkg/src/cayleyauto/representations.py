"""Cayley automatic representations: built-in families, combinators, checks.

A representation bundles a group, a regular language ``L``, a bijective
codec between ``L`` and the group, and one synchronous two-track
multiplier automaton per generator ``a`` accepting the pairs
``(encode(g), encode(g a))``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import encodings as enc
from .automata import (
    PAD,
    AutomatonError,
    CapExceeded,
    Dfa,
    MalformedConvolution,
    Nfa,
    as_word,
    atom_ranks,
    convolve,
    deconvolve,
    enumerate_upto,
    load_dfa,
    save_dfa,
    sort_symbols,
)
from .groups import (
    DirectProduct,
    FiniteExtension,
    FreeProduct,
    Group,
    Heisenberg,
    Lamplighter,
    Semidirect,
    Unitriangular,
    heisenberg_to_semidirect,
    infinite_dihedral,
    integers,
    semidirect_to_heisenberg,
)
from .relations import (
    Transducer,
    compose,
    copy_relation,
    identity_relation,
    max_padding_tail,
    restrict,
    seq_relation,
    transpose,
    union_rel,
)


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CayleyRep:
    name: str
    group: Group
    language: Dfa
    multipliers: dict
    encode: Callable
    decode: Callable
    codec: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = set(self.group.generators) - set(self.multipliers)
        if missing:
            raise RepresentationError(f"no multiplier for generators {sorted(missing)}")

    @property
    def sigma(self) -> tuple:
        """Letters that actually occur in the language."""
        return self.language.trim().used_symbols()

    def over_group_letters(self) -> bool:
        return set(self.sigma) <= set(self.group.letters)

    def max_multiplier_states(self) -> int:
        return max(m.n_states for m in self.multipliers.values())

    def with_multiplier(self, gen: str, dfa: Dfa) -> "CayleyRep":
        mults = dict(self.multipliers)
        mults[gen] = dfa
        return CayleyRep(self.name, self.group, self.language, mults, self.encode, self.decode, self.codec)


def _pairs_dfa(pairs, alphabet=None) -> Dfa:
    """Finite relation from explicit word pairs."""
    cws = [convolve([a, b]) for a, b in pairs]
    syms = {s for cw in cws for s in cw}
    if alphabet is None:
        alphabet = sort_symbols(syms, atom_ranks(*[tuple(a) + tuple(b) for a, b in pairs]))
    return Dfa.from_words(cws, alphabet)


def _language(*parts: Nfa) -> Dfa:
    n = parts[0]
    for p in parts[1:]:
        n = n.concat(p)
    return n.determinize()


def _lang_nfa(d: Dfa) -> Nfa:
    return Nfa.from_dfa(d)


# ---------------------------------------------------------------------------
# integers
# ---------------------------------------------------------------------------


def rep_unary_z(pos: str = "P", neg: str = "N") -> CayleyRep:
    """Z with L = P* u N*, where the letters are the group letters."""
    G = integers(pos, neg)
    L = Nfa.any_of([pos]).star().union(Nfa.any_of([neg]).star())
    L.alphabet = (pos, neg)
    lang = L.determinize()
    cp = Nfa.from_dfa(copy_relation([pos]))
    cn = Nfa.from_dfa(copy_relation([neg]))
    up = cp.concat(Nfa.literal([(PAD, pos)]))
    down = cn.concat(Nfa.literal([(neg, PAD)]))
    m = up.union(down)
    m.alphabet = ((pos, pos), (neg, neg), (neg, PAD), (PAD, pos))
    mult = m.determinize()
    return CayleyRep(
        "unary-z", G, lang, {pos: mult},
        encode=lambda g: tuple(enc.encode_unary(g[0], pos, neg)),
        decode=lambda w: (enc.decode_unary(w, pos, neg),),
        codec={"rep": "unary-z", "pos": pos, "neg": neg},
    )


def rep_binary_z(gen: str = "a", inv: str = "A") -> CayleyRep:
    """Z with signed binary words over {+,-,0,1}."""
    G = integers(gen, inv)
    return CayleyRep(
        "binary-z", G, enc.validity_automaton(1), {gen: enc.successor_automaton()},
        encode=lambda g: tuple(enc.encode_binary(g[0])),
        decode=lambda w: (enc.decode_binary(w),),
        codec={"rep": "binary-z", "gen": gen, "inv": inv},
    )


# ---------------------------------------------------------------------------
# semidirect products, Heisenberg, unitriangular
# ---------------------------------------------------------------------------


def _unary_lang() -> Nfa:
    n = Nfa.any_of(["P"]).star().union(Nfa.any_of(["N"]).star())
    n.alphabet = ("P", "N")
    return n


def _semidirect_parts(A):
    n = len(A)
    V = enc.validity_automaton(n)
    lang = _language(_unary_lang(), Nfa.from_dfa(V))
    ident = [[int(i == j) for j in range(n)] for i in range(n)]
    copy_u = copy_relation(["P", "N"])
    xs = []
    for i in range(n):
        c = [int(j == i) for j in range(n)]
        xs.append(seq_relation(copy_u, enc.affine_relation(ident, c)))
    up = Transducer.copy(["P"]).star() + Transducer.pair((), ("P",))
    down = Transducer.copy(["N"]).star() + Transducer.pair(("N",), ())
    t = ((up | down) + Transducer.from_sync(enc.affine_relation(A))).to_sync(lag=1)
    return lang, restrict(t, lang, lang), [restrict(x, lang, lang) for x in xs]


def _split_unary(w):
    w = as_word(w)
    k = 0
    while k < len(w) and w[k] in ("P", "N"):
        k += 1
    return w[:k], w[k:]


def _semidirect_codec(n):
    def encode(g):
        y, z = g
        return tuple(enc.encode_unary(y)) + enc.letters_of(z)

    def decode(w):
        u, v = _split_unary(w)
        return (enc.decode_unary(u), enc.values_of(v, n))

    return encode, decode


def rep_semidirect(A) -> CayleyRep:
    """Z^n x_A Z: unary word for the Z part, then binary convolution."""
    G = Semidirect(A)
    lang, t, xs = _semidirect_parts(G.A)
    mults = {G.generators[0]: t}
    for i, m in enumerate(xs):
        mults[G.generators[i + 1]] = m
    encode, decode = _semidirect_codec(G.n)
    return CayleyRep("semidirect", G, lang, mults, encode, decode, {"rep": "semidirect", "A": G.A})


def rep_heisenberg() -> CayleyRep:
    """H3 through (x, y, z) -> (y, (x, z)) in Z^2 x_T Z."""
    G = Heisenberg()
    lang, t, xs = _semidirect_parts([[1, 0], [1, 1]])
    encode2, decode2 = _semidirect_codec(2)
    return CayleyRep(
        "heisenberg", G, lang, {"s": xs[0], "p": t, "q": xs[1]},
        encode=lambda g: encode2(heisenberg_to_semidirect(g)),
        decode=lambda w: semidirect_to_heisenberg(decode2(w)),
        codec={"rep": "heisenberg"},
    )


def rep_unitriangular(n: int = 3) -> CayleyRep:
    """UT_n via the convolution of the above-diagonal entries."""
    if n < 3:
        raise RepresentationError("unitriangular representation needs n >= 3")
    G = Unitriangular(n)
    pos = G.positions
    d = len(pos)
    idx = {p: k for k, p in enumerate(pos)}
    mults = {}
    for (i, j), gen in zip(pos, G.generators):
        M = [[int(r == c) for c in range(d)] for r in range(d)]
        for r in range(1, i):
            M[idx[(r, j)]][idx[(r, i)]] += 1
        c = [0] * d
        c[idx[(i, j)]] = 1
        mults[gen] = enc.affine_relation(M, c)
    return CayleyRep(
        f"ut{n}", G, enc.validity_automaton(d), mults,
        encode=lambda g: enc.letters_of(g),
        decode=lambda w: enc.values_of(w, d),
        codec={"rep": "unitriangular", "n": n},
    )


# ---------------------------------------------------------------------------
# lamplighter over {+,-,0,1,C0,C1,#}
# ---------------------------------------------------------------------------

LAMP_SIGMA = ("+", "-", "0", "1", "#", "C0", "C1")


def lamplighter_encode(g) -> tuple:
    lit, z = g
    lo = min(lit + (z,))
    hi = max(lit + (z,))
    on = set(lit)
    window = []
    for i in range(lo, hi + 1):
        if i == z:
            window.append("C1" if i in on else "C0")
        else:
            window.append("1" if i in on else "0")
    return tuple(enc.encode_binary_msb(lo)) + ("#",) + tuple(window)


def lamplighter_decode(w) -> tuple:
    w = as_word(w)
    if w.count("#") != 1:
        raise enc.CodecError("expected exactly one '#'")
    k = w.index("#")
    lo = enc.decode_binary_msb(w[:k])
    window = w[k + 1:]
    cursors = [i for i, c in enumerate(window) if c in ("C0", "C1")]
    if len(cursors) != 1 or any(c not in ("0", "1", "C0", "C1") for c in window):
        raise enc.CodecError("window needs exactly one cursor letter")
    if window[0] == "0" or window[-1] == "0":
        raise enc.CodecError("window has an unlit end that is not the cursor")
    lit = tuple(lo + i for i, c in enumerate(window) if c in ("1", "C1"))
    return (lit, lo + cursors[0])


def _msb_lang() -> Nfa:
    sign = Nfa.any_of(["+", "-"])
    digits = Nfa.literal(["1"]).concat(Nfa.any_of(["0", "1"]).star())
    return Nfa.literal(["+", "0"]).union(sign.concat(digits))


def _lamplighter_language() -> Dfa:
    inner = Nfa.any_of(["0", "1"]).star()
    cur = Nfa.any_of(["C0", "C1"])
    window = cur.union(
        Nfa.any_of(["1"]).concat(inner, cur),
        cur.concat(inner, Nfa.any_of(["1"])),
        Nfa.any_of(["1"]).concat(inner, cur, inner, Nfa.any_of(["1"])),
    )
    nfa = _msb_lang().concat(Nfa.literal(["#"]), window)
    nfa.alphabet = LAMP_SIGMA
    return nfa.determinize()


def _tp(x, y) -> Transducer:
    """Transducer pair where a bare string is one letter."""
    wrap = lambda v: (v,) if isinstance(v, str) else tuple(v)
    return Transducer.pair(wrap(x), wrap(y))


def _msb_increment_parts() -> list:
    """Pairs (u, u') with decode(u') = decode(u) + 1, as (transducer, lag) pieces."""
    P = _tp
    D = Transducer.copy(["0", "1"])
    return [
        (P("+", "+") + D.star() + P("0", "1") + P("1", "0").star(), 0),
        (P("+", "+") + P((), "1") + P("1", "0").plus(), 1),
        (P(("-", "1"), ("+", "0")), 1),
        (P("-", "-") + Transducer.copy(["1"]) + D.star() + P("1", "0") + P("0", "1").star(), 0),
        (P("-", "-") + P("1", ()) + P("0", "1").plus(), 1),
    ]


def _lamplighter_t(lang: Dfa) -> Dfa:
    P = _tp
    U = Transducer.copy(["+", "-", "0", "1"]).star()
    H = P("#", "#")
    D = Transducer.copy(["0", "1"])
    shift = (P("0", "C0") | P("1", "C1")) + D.star()
    before = (D.plus() + (P("C0", "0") | P("C1", "1"))) | P("C1", "1")
    # cursor moves right inside the window, or steps past its right end
    rel = union_rel(
        (U + H + before + shift).to_sync(lag=0),
        (U + H + before + P((), "C0")).to_sync(lag=0),
    )
    # cursor leaves an unlit left end: the window shrinks and the offset grows;
    # each branch is resynchronised with the smallest lag it needs
    for inc, lag in _msb_increment_parts():
        rel = union_rel(rel, (inc + H + P("C0", ()) + shift).to_sync(lag=lag + 1))
        rel = union_rel(rel, (inc + H + P("C0", "C0")).to_sync(lag=max(lag, 0)))
    return restrict(rel, lang, lang)


def _lamplighter_a(lang: Dfa) -> Dfa:
    keep = copy_relation(["+", "-", "0", "1", "#"])
    flip = Dfa.from_words([[("C0", "C1")], [("C1", "C0")]], [("C0", "C1"), ("C1", "C0")])
    rel = seq_relation(keep, flip, copy_relation(["0", "1"]))
    return restrict(rel, lang, lang)


def rep_lamplighter_sigma() -> CayleyRep:
    G = Lamplighter()
    lang = _lamplighter_language()
    return CayleyRep(
        "lamplighter", G, lang, {"a": _lamplighter_a(lang), "t": _lamplighter_t(lang)},
        encode=lamplighter_encode, decode=lamplighter_decode,
        codec={"rep": "lamplighter"},
    )


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def _rename(letter, suffix="'"):
    if isinstance(letter, str):
        return letter + suffix
    return (suffix,) + tuple(letter)


def relabel_rep(R: CayleyRep, taken: set) -> tuple[CayleyRep, dict]:
    """Rename letters of ``R`` that clash with ``taken``."""
    mapping = {}
    for s in R.language.alphabet:
        t = s
        while t in taken or t in mapping.values():
            t = _rename(t)
        mapping[s] = t
    if all(k == v for k, v in mapping.items()):
        return R, mapping
    back = {v: k for k, v in mapping.items()}

    def ren(d: Dfa, f) -> Dfa:
        return Dfa(tuple(f(s) for s in d.alphabet), d.table, d.start, d.accepting)

    lang = ren(R.language, lambda s: mapping[s])
    mults = {
        g: ren(m, lambda s: tuple(PAD if c == PAD else mapping[c] for c in s))
        for g, m in R.multipliers.items()
    }
    return CayleyRep(
        R.name, R.group, lang, mults,
        encode=lambda g: tuple(mapping[c] for c in R.encode(g)),
        decode=lambda w: R.decode(tuple(back[c] for c in as_word(w))),
        codec=R.codec,
    ), mapping


def _lag_for(rel: Dfa, extra: int = 0) -> int:
    tail = max_padding_tail(rel)
    if tail is None:
        raise RepresentationError("multiplier relates words of unbounded length difference")
    return tail + extra


def rep_direct_product(R1: CayleyRep, R2: CayleyRep) -> CayleyRep:
    """L = L1 L2 with the second factor's letters made disjoint."""
    G = DirectProduct(R1.group, R2.group)
    R2r, _ = relabel_rep(R2, set(R1.language.alphabet))
    sig1 = R1.language.alphabet
    sig2 = R2r.language.alphabet
    lang = _language(Nfa.from_dfa(R1.language), Nfa.from_dfa(R2r.language))
    mults = {}
    for gen in R1.group.generators:
        T = Transducer.from_sync(R1.multipliers[gen]) + Transducer.copy(sig2).star()
        mults[gen] = restrict(T.to_sync(lag=_lag_for(R1.multipliers[gen], 1)), lang, lang)
    for gen in R2.group.generators:
        rel = seq_relation(copy_relation(sig1), R2r.multipliers[gen])
        mults[G.local_letter(1, gen)] = restrict(rel, lang, lang)
    s1 = set(sig1)

    def decode(w):
        w = as_word(w)
        k = 0
        while k < len(w) and w[k] in s1:
            k += 1
        return (R1.decode(w[:k]), R2r.decode(w[k:]))

    return CayleyRep(
        f"{R1.name}x{R2.name}", G, lang, mults,
        encode=lambda g: tuple(R1.encode(g[0])) + tuple(R2r.encode(g[1])),
        decode=decode,
        codec={"rep": "direct", "factors": [R1.codec, R2.codec]},
    )


def repoint_identity(R: CayleyRep) -> CayleyRep:
    """Make the empty word encode the identity."""
    e = R.group.identity()
    we = tuple(R.encode(e))
    if not we:
        return R
    if R.language.accepts(()):
        raise RepresentationError("empty word already encodes a non-identity element")
    G = R.group
    rest = Dfa.from_words([we], R.language.alphabet)
    from .automata import difference, union

    core = difference(R.language, rest)
    lang = union(core, Dfa.from_words([()], R.language.alphabet))
    mults = {}
    for gen in G.generators:
        m = restrict(R.multipliers[gen], core, core)
        extra = _pairs_dfa([((), R.encode(G.letter_value(gen))),
                            (R.encode(G.letter_value(G.inverse_letter(gen))), ())])
        mults[gen] = union_rel(m, extra)

    def encode(g):
        return () if g == e else tuple(R.encode(g))

    def decode(w):
        w = as_word(w)
        if not w:
            return e
        if w == we:
            raise enc.CodecError("word was re-pointed away")
        return R.decode(w)

    return CayleyRep(R.name, G, lang, mults, encode, decode, R.codec)


def rep_free_product(R1: CayleyRep, R2: CayleyRep) -> CayleyRep:
    """Alternating syllables from the two factor languages."""
    G = FreeProduct(R1.group, R2.group)
    A1 = repoint_identity(R1)
    A2, _ = relabel_rep(repoint_identity(R2), set(A1.language.alphabet))
    from .automata import difference

    eps1 = Dfa.from_words([()], A1.language.alphabet)
    eps2 = Dfa.from_words([()], A2.language.alphabet)
    X = Nfa.from_dfa(difference(A1.language, eps1))
    Y = Nfa.from_dfa(difference(A2.language, eps2))
    empty = Nfa.literal([])
    alt = empty.union(
        X.concat(Y.concat(X).star(), Y.union(empty)),
        Y.concat(X.concat(Y).star(), X.union(empty)),
    )
    sig1 = A1.language.alphabet
    sig2 = A2.language.alphabet
    alt.alphabet = tuple(sig1) + tuple(sig2)
    lang = alt.determinize()
    sigma = tuple(sig1) + tuple(sig2)

    def mult_for(side, rep, other_sig, gen):
        base = rep.multipliers[gen]
        nonempty = difference(rep.language, Dfa.from_words([()], rep.language.alphabet))
        tail_a = restrict(base, left=nonempty)
        prefix = Nfa.literal([]).union(
            Nfa.from_dfa(copy_relation(sigma)).concat(Nfa.from_dfa(copy_relation(other_sig, star=False)))
        )
        appended = _pairs_dfa([((), rep.encode(rep.group.letter_value(gen)))])
        body = Nfa.from_dfa(tail_a).union(Nfa.from_dfa(appended))
        nfa = prefix.concat(body)
        nfa.alphabet = sort_symbols(
            {s for d in (copy_relation(sigma), tail_a, appended) for s in d.alphabet}, atom_ranks(sigma)
        )
        return restrict(nfa.determinize(), lang, lang)

    mults = {}
    for gen in R1.group.generators:
        mults[gen] = mult_for(0, A1, sig2, gen)
    for gen in R2.group.generators:
        mults[G.local_letter(1, gen)] = mult_for(1, A2, sig1, gen)
    s1 = set(sig1)

    def decode(w):
        w = as_word(w)
        out = []
        i = 0
        while i < len(w):
            side = 0 if w[i] in s1 else 1
            j = i
            while j < len(w) and (w[j] in s1) == (side == 0):
                j += 1
            x = (A1 if side == 0 else A2).decode(w[i:j])
            if x == G.factors[side].identity():
                raise enc.CodecError("empty syllable")
            out.append((side, x))
            i = j
        return tuple(out)

    def encode(g):
        out = []
        for side, x in g:
            out += list((A1 if side == 0 else A2).encode(x))
        return tuple(out)

    return CayleyRep(
        f"{R1.name}*{R2.name}", G, lang, mults, encode, decode,
        codec={"rep": "free", "factors": [R1.codec, R2.codec]},
    )


def rep_finite_extension(RH: CayleyRep, G: FiniteExtension) -> CayleyRep:
    """L = L_H . {eps, v_1, ..., v_m} with v_i the word of the coset representative."""
    if G.H is not RH.group and G.H.spec() != RH.group.spec():
        raise RepresentationError("coset system is over a different subgroup")
    H = RH.group
    tails = [tuple(r) for r in G.reps]
    sig_h = set(RH.language.alphabet)
    if any(c in sig_h for r in tails for c in r):
        raise RepresentationError("coset words clash with the subgroup alphabet")
    tail_lang = Nfa.literal([])
    for r in tails[1:]:
        tail_lang = tail_lang.union(Nfa.literal(r))
    letters = tuple(dict.fromkeys(c for r in tails for c in r))
    tail_lang.alphabet = letters
    lang = _language(Nfa.from_dfa(RH.language), tail_lang)
    ident = identity_relation(RH.language)

    rel_cache: dict = {}

    def rel_of(word):
        word = tuple(word)
        if word not in rel_cache:
            rel = ident
            for letter in word:
                if letter in RH.multipliers:
                    step = RH.multipliers[letter]
                else:
                    step = transpose(RH.multipliers[H.inverse_letter(letter)])
                rel = compose(rel, step)
            rel_cache[word] = rel
        return rel_cache[word]

    mults = {}
    for gen in G.generators:
        parts = []
        lag = 0
        for i in range(G.m):
            w, j = G.action[(i, gen)]
            rel = rel_of(w)
            lag = max(lag, _lag_for(rel, len(tails[i]) + len(tails[j])))
            parts.append(Transducer.from_sync(rel) + Transducer.pair(tails[i], tails[j]))
        T = parts[0].union(*parts[1:])
        mults[gen] = restrict(T.to_sync(lag=lag), lang, lang)

    tail_index = {r: i for i, r in enumerate(tails)}

    def decode(w):
        w = as_word(w)
        k = len(w)
        while k > 0 and w[k - 1] not in sig_h:
            k -= 1
        tail = w[k:]
        if tail not in tail_index:
            raise enc.CodecError(f"unknown coset word {tail!r}")
        return (RH.decode(w[:k]), tail_index[tail])

    return CayleyRep(
        f"{RH.name}:{G.name}", G, lang, mults,
        encode=lambda g: tuple(RH.encode(g[0])) + tails[g[1]],
        decode=decode,
        codec={"rep": "extension", "name": G.name, "H": RH.codec},
    )


def rep_dihedral() -> CayleyRep:
    return rep_finite_extension(rep_unary_z(), infinite_dihedral())


# ---------------------------------------------------------------------------
# block re-encoding
# ---------------------------------------------------------------------------


def _substitute(d: Dfa, image, alphabet) -> Dfa:
    nfa = Nfa(alphabet)
    nfa.n_states = d.n_states
    nfa.starts = {d.start}
    nfa.accepting = set(np.nonzero(d.accepting)[0].tolist())
    for p, s, q in d.transitions():
        block = image(s)
        cur = p
        for k, b in enumerate(block):
            nxt = q if k == len(block) - 1 else nfa.add_state()
            nfa.add(cur, b, nxt)
            cur = nxt
    return nfa.determinize()


def reencode(R: CayleyRep, bm: enc.BlockMap | None = None) -> CayleyRep:
    """Letter-to-block substitution onto the group letters."""
    S = R.group.letters
    sigma = R.sigma
    if bm is None:
        bm = enc.default_block_map(sigma, S)
    missing = [s for s in sigma if s not in bm.images]
    if missing:
        raise enc.CodecError(f"block map misses letters {missing!r}")
    if any(c not in S for w in bm.images.values() for c in w):
        raise enc.CodecError("block images must be words over the group letters")
    ell = bm.length
    lang = _substitute(R.language, lambda s: bm.images[s], S)
    pair_alpha = sort_symbols(
        [(a, b) for a in S + (PAD,) for b in S + (PAD,) if (a, b) != (PAD, PAD)], atom_ranks(S)
    )

    def pair_image(sym):
        a, b = sym
        wa = (PAD,) * ell if a == PAD else bm.images[a]
        wb = (PAD,) * ell if b == PAD else bm.images[b]
        return tuple(zip(wa, wb))

    mults = {g: _substitute(m, pair_image, pair_alpha) for g, m in R.multipliers.items()}
    return CayleyRep(
        R.name + "-s", R.group, lang, mults,
        encode=lambda g: bm.encode(R.encode(g)),
        decode=lambda w: R.decode(bm.decode(w)),
        codec={**R.codec, "blocks": {_key(k): list(v) for k, v in bm.images.items()}},
    )


def _key(sym) -> str:
    return json.dumps(sym if isinstance(sym, str) else list(sym))


# ---------------------------------------------------------------------------
# registry and bundles
# ---------------------------------------------------------------------------


def _direct_zz():
    return rep_direct_product(rep_unary_z("P", "N"), rep_unary_z("q", "r"))


def _free_zz():
    return rep_free_product(rep_unary_z("P", "N"), rep_unary_z("q", "r"))


BUILTINS = {
    "unary-z": rep_unary_z,
    "binary-z": rep_binary_z,
    "heisenberg": rep_heisenberg,
    "ut3": lambda: rep_unitriangular(3),
    "lamplighter": rep_lamplighter_sigma,
    "direct-zz": _direct_zz,
    "free-zz": _free_zz,
    "dihedral": rep_dihedral,
}

_CACHE: dict = {}


def builtin(name: str) -> CayleyRep:
    """Built-in representation by name; ``-s`` suffix re-encodes over S."""
    if name in _CACHE:
        return _CACHE[name]
    if name.endswith("-s") and name[:-2] in BUILTINS:
        rep = reencode(builtin(name[:-2]))
    elif name.startswith("semidirect:"):
        rep = rep_semidirect(json.loads(name.split(":", 1)[1]))
    elif name.startswith("ut") and name[2:].isdigit():
        rep = rep_unitriangular(int(name[2:]))
    elif name in BUILTINS:
        rep = BUILTINS[name]()
    else:
        raise RepresentationError(f"unknown representation {name!r}")
    _CACHE[name] = rep
    return rep


def save_bundle(R: CayleyRep, path, rep_id: str) -> None:
    os.makedirs(path, exist_ok=True)
    save_dfa(R.language, os.path.join(path, "language.json"))
    for g, m in R.multipliers.items():
        save_dfa(m, os.path.join(path, f"mult_{g}.json"))
    with open(os.path.join(path, "codec.json"), "w") as fh:
        json.dump({"id": rep_id, "group": R.group.spec(), "codec": R.codec}, fh, indent=1, sort_keys=True)


def load_bundle(path) -> CayleyRep:
    """Rebuild a representation: codec from ``codec.json``, automata from files."""
    with open(os.path.join(path, "codec.json")) as fh:
        meta = json.load(fh)
    base = builtin(meta["id"])
    lang = load_dfa(os.path.join(path, "language.json"))
    mults = {g: load_dfa(os.path.join(path, f"mult_{g}.json")) for g in base.group.generators}
    return CayleyRep(base.name, base.group, lang, mults, base.encode, base.decode, base.codec)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    rep: str
    k: int
    words: int
    injective: bool = True
    codec_ok: bool = True
    multipliers_exact: bool = True
    surjective_on_ball: bool = True
    C: int = 0
    pairs_checked: int = 0
    counterexample: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.injective and self.codec_ok and self.multipliers_exact and self.surjective_on_ball

    def to_json(self) -> dict:
        return {
            "rep": self.rep, "k": self.k, "passed": self.passed, "words": self.words,
            "injective": self.injective, "codec_ok": self.codec_ok,
            "multipliers_exact": self.multipliers_exact,
            "surjective_on_ball": self.surjective_on_ball, "C": self.C,
            "pairs_checked": self.pairs_checked,
            "counterexample": self.counterexample, "notes": self.notes,
        }


def enumerate_capped(d: Dfa, k: int, cap: int) -> list:
    from .automata import count_upto

    total = count_upto(d, k)
    if total > cap:
        raise CapExceeded(f"{total} words of length <= {k} exceed the cap {cap}")
    return list(enumerate_upto(d, k))


def show_word(w) -> str:
    return " ".join(str(c) if isinstance(c, str) else "(" + ",".join(c) + ")" for c in w) or "<empty>"


def _chunks(seq, n):
    size = max(1, -(-len(seq) // max(n, 1)))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def verify_rep(R: CayleyRep, k: int, cap: int = 500_000, workers: int = 1, ball_radius: int = 2) -> VerifyReport:
    """Exhaustive check of the representation on words of length <= k."""
    G = R.group
    words = enumerate_capped(R.language, k, cap)
    rep = VerifyReport(R.name, k, len(words))

    def fail(kind, **info):
        if rep.counterexample is None:
            rep.counterexample = {"kind": kind, **info}

    decoded = {}
    for w in words:
        try:
            g = R.decode(w)
        except Exception as exc:  # noqa: BLE001
            rep.codec_ok = False
            fail("decode", word=show_word(w), error=str(exc))
            continue
        if g in decoded:
            rep.injective = False
            fail("injectivity", word=show_word(w), other=show_word(decoded[g]), element=repr(g))
        decoded[g] = w
        if tuple(R.encode(g)) != tuple(w):
            rep.codec_ok = False
            fail("codec", word=show_word(w), element=repr(g), encoded=show_word(R.encode(g)))

    items = list(decoded.items())
    elem_of = {w: g for g, w in items}

    def check_chunk(gen, chunk):
        m = R.multipliers[gen]
        a = G.letter_value(gen)
        worst = shorter = 0
        pairs = []
        for g, w in chunk:
            w2 = tuple(R.encode(G.multiply(g, a)))
            diff = abs(len(w2) - len(w))
            worst = max(worst, diff)
            if len(w) < k:
                shorter = max(shorter, diff)
            if len(w2) <= k:
                pairs.append((w, w2))
        ok = m.accepts_many([convolve(p) for p in pairs]) if pairs else []
        bad = [
            {"kind": "missing-pair", "generator": gen, "left": show_word(w), "right": show_word(w2)}
            for (w, w2), good in zip(pairs, ok) if not good
        ]
        return worst, shorter, bad[:1], len(pairs)

    c_short = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for gen in G.generators:
            results = list(pool.map(lambda c: check_chunk(gen, c), _chunks(items, workers)))
            for worst, shorter, bad, n in results:
                rep.C = max(rep.C, worst)
                c_short = max(c_short, shorter)
                rep.pairs_checked += n
                if bad:
                    rep.multipliers_exact = False
                    if rep.counterexample is None:
                        rep.counterexample = bad[0]
            m = R.multipliers[gen]
            a = G.letter_value(gen)
            for cw in enumerate_upto(m, k):
                try:
                    w1, w2 = deconvolve(cw, 2)
                except MalformedConvolution:
                    rep.multipliers_exact = False
                    fail("malformed-pair", generator=gen, word=show_word(cw))
                    break
                g1, g2 = elem_of.get(w1), elem_of.get(w2)
                if g1 is None or g2 is None or G.multiply(g1, a) != g2:
                    rep.multipliers_exact = False
                    fail("spurious-pair", generator=gen, left=show_word(w1), right=show_word(w2))
                    break

    if k >= 2 and rep.C > c_short:
        rep.notes.append(f"bounded-difference constant still growing: {c_short} below length {k}, {rep.C} at {k}")

    # every element of a small ball has a valid encoding
    from .metrics import ball as make_ball

    try:
        B = make_ball(G, ball_radius, cap=cap)
        for g in B.elements():
            w = tuple(R.encode(g))
            if not R.language.accepts(w) or R.decode(w) != g:
                rep.surjective_on_ball = False
                fail("surjectivity", element=repr(g), word=show_word(w))
                break
    except CapExceeded:
        rep.notes.append("ball check skipped (cap)")
    return rep


def bounded_difference_const(R: CayleyRep, k: int, cap: int = 500_000) -> int:
    """max ||encode(g a)| - |encode(g)|| over words of length <= k."""
    G = R.group
    C = 0
    for w in enumerate_capped(R.language, k, cap):
        g = R.decode(w)
        for gen in G.generators:
            C = max(C, abs(len(R.encode(G.multiply(g, G.letter_value(gen)))) - len(w)))
    return C


def corrupt_multiplier(R: CayleyRep, gen: str, seed: int = 0) -> CayleyRep:
    """Copy of ``R`` with one transition of a multiplier retargeted."""
    m = R.multipliers[gen]
    rng = np.random.default_rng(seed)
    src, col = np.nonzero(m.table >= 0)
    order = rng.permutation(len(src))
    for i in order:
        p, j = int(src[i]), int(col[i])
        old = int(m.table[p, j])
        for q in rng.permutation(m.n_states):
            if int(q) != old:
                table = m.table.copy()
                table[p, j] = int(q)
                bad = Dfa(m.alphabet, table, m.start, m.accepting)
                if not bad.same_language(m):
                    return R.with_multiplier(gen, bad)
    raise AutomatonError("no corrupting retarget found")
