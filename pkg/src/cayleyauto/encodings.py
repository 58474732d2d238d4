"""Integer codecs and their arithmetic relation automata.

The signed binary codec writes a sign and then the digits least significant
first, with ``+0`` for zero.  The unary codec writes ``|y|`` copies of a
positive or negative letter.  Relations ``y = M x + c`` between tuples of
binary-coded integers are recognised by a single carry-propagating
automaton; successor and linear maps are special cases.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .automata import PAD, Dfa, atom_ranks, sort_symbols

SIGNS = ("+", "-")
DIGITS = ("0", "1")
BINARY_ALPHABET = ("+", "-", "0", "1")


class CodecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# codecs
# ---------------------------------------------------------------------------


def encode_binary(z: int) -> str:
    if z == 0:
        return "+0"
    sign = "+" if z > 0 else "-"
    return sign + format(abs(z), "b")[::-1]


def decode_binary(w) -> int:
    w = "".join(w)
    if len(w) < 2 or w[0] not in SIGNS or any(c not in DIGITS for c in w[1:]):
        raise CodecError(f"not a signed binary word: {w!r}")
    if w == "+0":
        return 0
    if w[-1] != "1":
        raise CodecError(f"non-canonical binary word: {w!r}")
    v = int(w[1:][::-1], 2)
    return v if w[0] == "+" else -v


def encode_binary_msb(z: int) -> str:
    """Sign then digits most significant first (the lamplighter offset)."""
    if z == 0:
        return "+0"
    return ("+" if z > 0 else "-") + format(abs(z), "b")


def decode_binary_msb(w) -> int:
    w = "".join(w)
    if len(w) < 2 or w[0] not in SIGNS or any(c not in DIGITS for c in w[1:]):
        raise CodecError(f"not a signed binary word: {w!r}")
    if w == "+0":
        return 0
    if w[1] != "1":
        raise CodecError(f"non-canonical binary word: {w!r}")
    v = int(w[1:], 2)
    return v if w[0] == "+" else -v


def encode_unary(y: int, pos: str = "P", neg: str = "N") -> str:
    return (pos if y >= 0 else neg) * abs(y)


def decode_unary(w, pos: str = "P", neg: str = "N") -> int:
    w = tuple(w)
    if all(c == pos for c in w):
        return len(w)
    if all(c == neg for c in w):
        return -len(w)
    raise CodecError(f"not a unary word: {w!r}")


# ---------------------------------------------------------------------------
# carry automata
# ---------------------------------------------------------------------------

# per-track phases
_SIGN, _ZERO, _ONE, _TRAIL, _END = range(5)
_CAN_END = (False, True, True, False, True)


def _digit_phase(phase: int, sign: str, d: int) -> int:
    if phase == _END:
        return -1
    if d == 1:
        return _ONE
    if phase == _SIGN and sign == "+":
        return _ZERO
    return _TRAIL


def affine_automaton(M: Sequence[Sequence[int]], c: Sequence[int] | None = None, n_in: int | None = None) -> Dfa:
    """Flat automaton over ``n_in + m`` binary tracks accepting ``y = M x + c``.

    Every track must be a canonical signed binary word.  With ``m = 0``
    the automaton is just the validity language of ``n_in``-tuples.
    """
    M = [[int(v) for v in row] for row in M]
    m = len(M)
    k = n_in if n_in is not None else (len(M[0]) if M else 0)
    if any(len(row) != k for row in M):
        raise CodecError("matrix rows must all have n_in columns")
    c = tuple(int(v) for v in (c if c is not None else [0] * m))
    t = k + m

    start = ("start",)
    ids = {start: 0}
    queue = [start]
    trans = []

    def target(state):
        if state not in ids:
            ids[state] = len(queue)
            queue.append(state)
        return ids[state]

    step_phase = {
        (ph, sg, d): (_END if d is None else _digit_phase(ph, sg, d))
        for ph in range(5) for sg in SIGNS for d in (0, 1, None)
    }
    contrib_cache: dict = {}

    def contribution(signs, ins):
        key = (signs, ins)
        if key not in contrib_cache:
            contrib_cache[key] = tuple(
                sum(M[j][i] * (1 if signs[i] == "+" else -1) for i in range(k) if ins[i]) for j in range(m)
            )
        return contrib_cache[key]

    head = 0
    while head < len(queue):
        state = queue[head]
        p = head
        head += 1
        if state == start:
            for signs in itertools.product(SIGNS, repeat=t):
                trans.append((p, signs, target((signs, (_SIGN,) * t, c))))
            continue
        signs, phases, carry = state
        out_sg = [1 if s == "+" else -1 for s in signs[k:]]
        in_opts = []
        for i in range(k):
            opts = [0, 1] if phases[i] != _END else []
            if _CAN_END[phases[i]]:
                opts.append(None)
            in_opts.append(opts)
        for ins in itertools.product(*in_opts):
            inputs_done = all(d is None for d in ins)
            add = contribution(signs, ins)
            base = [carry[j] + add[j] for j in range(m)]
            out_opts = []
            for j in range(m):
                ph = phases[k + j]
                need = base[j] & 1
                opts = [need] if ph != _END else []
                if need == 0 and _CAN_END[ph]:
                    opts.append(None)
                out_opts.append(opts)
            in_phases = tuple(step_phase[phases[i], signs[i], d] for i, d in enumerate(ins))
            for outs in itertools.product(*out_opts):
                if inputs_done and all(d is None for d in outs):
                    continue
                new_carry = tuple((base[j] - out_sg[j] * (outs[j] or 0)) >> 1 for j in range(m))
                out_phases = tuple(step_phase[phases[k + j], signs[k + j], d] for j, d in enumerate(outs))
                if inputs_done and any(
                    (out_phases[j] == _END and new_carry[j]) or out_sg[j] * new_carry[j] < 0 for j in range(m)
                ):
                    # with the inputs finished, each output must absorb its carry exactly
                    continue
                sym = tuple(PAD if d is None else str(d) for d in ins + outs)
                trans.append((p, sym, target((signs, in_phases + out_phases, new_carry))))

    accepting = [
        q for q, s in enumerate(queue)
        if s != start and all(_CAN_END[ph] for ph in s[1]) and all(v == 0 for v in s[2])
    ]
    alphabet = sort_symbols({s for _, s, _ in trans}, atom_ranks(BINARY_ALPHABET))
    return Dfa.from_transitions(alphabet, len(queue), 0, accepting, trans).minimize()


def group_symbol(sym: tuple, sizes: Sequence[int]) -> tuple:
    """Regroup a flat track tuple into per-variable letters.

    A group of size one becomes its bare component; an all-padding group
    becomes ``PAD``.
    """
    out = []
    pos = 0
    for size in sizes:
        part = sym[pos:pos + size]
        pos += size
        if all(x == PAD for x in part):
            out.append(PAD)
        elif size == 1:
            out.append(part[0])
        else:
            out.append(part)
    return tuple(out)


def flatten_symbol(sym: tuple, sizes: Sequence[int]) -> tuple:
    out = []
    for x, size in zip(sym, sizes):
        if x == PAD:
            out += [PAD] * size
        elif size == 1:
            out.append(x)
        else:
            out += list(x)
    return tuple(out)


def nest(flat: Dfa, sizes: Sequence[int]) -> Dfa:
    """View a flat multi-track automaton as one over grouped letters."""
    ranks = atom_ranks(BINARY_ALPHABET)
    new = [group_symbol(s, sizes) for s in flat.alphabet]
    if len(sizes) == 1:
        new = [s[0] for s in new]
    order = sort_symbols(new, ranks)
    index = {s: i for i, s in enumerate(order)}
    table = np.full((flat.n_states, len(order)), -1, dtype=np.int32)
    for j, s in enumerate(new):
        table[:, index[s]] = flat.table[:, j]
    return Dfa(order, table, flat.start, flat.accepting)


@functools.lru_cache(maxsize=16)
def validity_automaton(k: int = 1) -> Dfa:
    """Canonical k-tuples of signed binary words, as a language of letters."""
    return nest(affine_automaton([], [], n_in=k), [k])


@functools.lru_cache(maxsize=64)
def _affine_relation_cached(M: tuple, c: tuple) -> Dfa:
    return nest(affine_automaton(M, c), [len(M), len(M)])


def affine_relation(M, c=None) -> Dfa:
    """Two-track relation ``(x, M x + c)`` over k-tuple letters."""
    M = tuple(tuple(int(v) for v in row) for row in M)
    c = tuple(int(v) for v in c) if c is not None else (0,) * len(M)
    return _affine_relation_cached(M, c)


def successor_automaton() -> Dfa:
    return affine_relation([[1]], [1])


def linear_map_automaton(M) -> Dfa:
    return affine_relation(M)


def letters_of(values: Sequence[int]) -> tuple:
    """Letters of the convolution of the binary words of ``values``."""
    from .automata import convolve

    cw = convolve([encode_binary(v) for v in values])
    if len(values) == 1:
        return tuple(s[0] for s in cw)
    return cw


def values_of(word, k: int) -> tuple:
    from .automata import deconvolve

    word = tuple(word)
    if k == 1:
        return (decode_binary(word),)
    return tuple(decode_binary(w) for w in deconvolve(word, k))


# ---------------------------------------------------------------------------
# block maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockMap:
    """Injective map from letters to equal-length words over ``S``."""

    images: dict

    def __post_init__(self):
        lengths = {len(w) for w in self.images.values()}
        if len(lengths) > 1:
            raise CodecError("block images have different lengths")
        if len(set(self.images.values())) != len(self.images):
            raise CodecError("block map is not injective")
        if lengths == {0} and len(self.images) > 1:
            raise CodecError("block map is not injective")

    @property
    def length(self) -> int:
        return len(next(iter(self.images.values()))) if self.images else 0

    def encode(self, word) -> tuple:
        out = []
        for sym in word:
            out += self.images[sym]
        return tuple(out)

    def decode(self, word) -> tuple:
        word = tuple(word)
        ell = self.length
        if ell == 0 or len(word) % ell:
            raise CodecError("word length is not a multiple of the block length")
        inv = {w: s for s, w in self.images.items()}
        try:
            return tuple(inv[word[i:i + ell]] for i in range(0, len(word), ell))
        except KeyError:
            raise CodecError("word contains an unknown block") from None


def block_length(n_letters: int, n_targets: int) -> int:
    if n_targets < 2:
        raise CodecError("target alphabet needs at least two letters")
    ell = max(1, math.ceil(math.log(max(n_letters, 1)) / math.log(n_targets) - 1e-12))
    while n_targets ** ell < n_letters:
        ell += 1
    return ell


def default_block_map(letters: Sequence, targets: Sequence) -> BlockMap:
    """Lexicographically first assignment of length-ell blocks."""
    letters = tuple(letters)
    targets = tuple(targets)
    ell = block_length(len(letters), len(targets))
    blocks = itertools.product(targets, repeat=ell)
    return BlockMap({s: tuple(b) for s, b in zip(letters, blocks)})


def block_reencode(rep, bm: BlockMap | None = None):
    """Re-encode a representation over its group's letters ``S``."""
    from .representations import reencode

    return reencode(rep, bm)
