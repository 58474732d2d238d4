"""Exact group arithmetic for the supported families.

Elements are plain hashable tuples in canonical form, so equality of
payloads is equality of group elements.  Every group exposes an ordered
letter set ``S`` (each generator followed by its inverse letter) and the
evaluation map ``evaluate_word`` from words over ``S`` to elements.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

import numpy as np


class GroupError(ValueError):
    pass


def _as_word(w) -> tuple:
    if isinstance(w, str):
        return tuple(w)
    return tuple(w)


class Group:
    """Base class; subclasses fill in the arithmetic."""

    family = "abstract"

    def __init__(self, generators: Sequence[str], inverses: Sequence[str]):
        self.generators = tuple(generators)
        self.inverse_letters = tuple(inverses)
        letters = []
        for g, i in zip(self.generators, self.inverse_letters):
            letters.append(g)
            letters.append(i)
        if len(set(letters)) != len(letters):
            raise GroupError(f"letters are not distinct: {letters}")
        self.letters = tuple(letters)
        self._inv = {}
        for g, i in zip(self.generators, self.inverse_letters):
            self._inv[g] = i
            self._inv[i] = g
        self._letter_value: dict = {}

    # subclasses implement these
    def identity(self):
        raise NotImplementedError

    def multiply(self, g, h):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def _generator_value(self, letter):
        raise NotImplementedError

    def to_word(self, g) -> tuple:
        """Some word over ``S`` evaluating to ``g`` (not necessarily geodesic)."""
        raise NotImplementedError

    def contains(self, g) -> bool:
        return True

    def params(self) -> dict:
        return {}

    @property
    def exponential_growth(self) -> bool:
        return False

    # shared machinery
    def letter_value(self, letter):
        v = self._letter_value.get(letter)
        if v is None:
            if letter not in self._inv:
                raise GroupError(f"unknown letter {letter!r} for {self.family}")
            if letter in self.generators:
                v = self._generator_value(letter)
            else:
                v = self.inverse(self._generator_value(self._inv[letter]))
            self._letter_value[letter] = v
        return v

    def inverse_letter(self, letter: str) -> str:
        return self._inv[letter]

    def evaluate_word(self, w):
        g = self.identity()
        for letter in _as_word(w):
            g = self.multiply(g, self.letter_value(letter))
        return g

    def key(self, g):
        return (self.family, g)

    def key_string(self, g) -> str:
        return repr(g).replace(" ", "")

    def random_element(self, rng: random.Random, length: int = 12):
        return self.evaluate_word(rng.choice(self.letters) for _ in range(length))

    def spec(self) -> dict:
        return {"family": self.family, **self.params()}

    def _check(self, g):
        if not self.contains(g):
            raise GroupError(f"{g!r} is not an element of {self.family}")

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


# ---------------------------------------------------------------------------
# Z^n
# ---------------------------------------------------------------------------


class FreeAbelian(Group):
    family = "zn"

    def __init__(self, n: int = 1, names=None):
        if n < 1:
            raise GroupError("rank must be positive")
        if names is None:
            names = [("a", "A")] if n == 1 else [(f"x{i + 1}", f"X{i + 1}") for i in range(n)]
        super().__init__([g for g, _ in names], [i for _, i in names])
        self.n = n

    def identity(self):
        return (0,) * self.n

    def multiply(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        return tuple(-a for a in g)

    def _generator_value(self, letter):
        i = self.generators.index(letter)
        return tuple(1 if j == i else 0 for j in range(self.n))

    def to_word(self, g):
        out = []
        for i, v in enumerate(g):
            out += [self.generators[i] if v > 0 else self.inverse_letters[i]] * abs(v)
        return tuple(out)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == self.n and all(isinstance(v, int) for v in g)

    def abelianization(self, g):
        return g

    def params(self):
        return {"n": self.n, "names": [list(p) for p in zip(self.generators, self.inverse_letters)]}


def integers(gen: str = "a", inv: str = "A") -> FreeAbelian:
    return FreeAbelian(1, [(gen, inv)])


# ---------------------------------------------------------------------------
# Heisenberg group and unitriangular matrices
# ---------------------------------------------------------------------------


class Heisenberg(Group):
    """Triples (x, y, z) with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')."""

    family = "heisenberg"

    def __init__(self):
        super().__init__(["s", "p", "q"], ["S", "P", "Q"])

    def identity(self):
        return (0, 0, 0)

    def multiply(self, g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def inverse(self, g):
        x, y, z = g
        return (-x, -y, -z + x * y)

    def _generator_value(self, letter):
        return {"s": (1, 0, 0), "p": (0, 1, 0), "q": (0, 0, 1)}[letter]

    def to_word(self, g):
        x, y, z = g
        r = z - x * y
        return (("s" if x > 0 else "S"),) * abs(x) + (("p" if y > 0 else "P"),) * abs(y) + (("q" if r > 0 else "Q"),) * abs(r)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 3

    def abelianization(self, g):
        return (g[0], g[1])


def heisenberg_to_semidirect(g):
    """(x, y, z) -> (y, (x, z)) in Z^2 semidirect Z with matrix T."""
    x, y, z = g
    return (y, (x, z))


def semidirect_to_heisenberg(h):
    y, (x, z) = h
    return (x, y, z)


class Unitriangular(Group):
    """Upper unitriangular integer n x n matrices.

    Payload: the entries above the diagonal in order (1,2),(1,3),...,(2,3),...
    """

    family = "unitriangular"

    def __init__(self, n: int = 3):
        if n < 2:
            raise GroupError("size must be at least 2")
        self.n = n
        self.positions = tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))
        super().__init__([f"t{i}{j}" for i, j in self.positions], [f"T{i}{j}" for i, j in self.positions])

    def matrix(self, g):
        m = [[int(i == j) for j in range(self.n)] for i in range(self.n)]
        for (i, j), v in zip(self.positions, g):
            m[i - 1][j - 1] = v
        return m

    def from_matrix(self, m):
        return tuple(m[i - 1][j - 1] for i, j in self.positions)

    def identity(self):
        return (0,) * len(self.positions)

    def multiply(self, g, h):
        if self.n == 3:
            return (g[0] + h[0], g[1] + h[1] + g[0] * h[2], g[2] + h[2])
        a = self.matrix(g)
        b = self.matrix(h)
        n = self.n
        c = [[sum(a[i][k] * b[k][j] for k in range(i, j + 1)) for j in range(n)] for i in range(n)]
        return self.from_matrix(c)

    def inverse(self, g):
        a = self.matrix(g)
        n = self.n
        inv = [[int(i == j) for j in range(n)] for i in range(n)]
        # back substitution on a unitriangular system
        for j in range(n):
            for i in range(j - 1, -1, -1):
                inv[i][j] = -sum(a[i][k] * inv[k][j] for k in range(i + 1, j + 1))
        return self.from_matrix(inv)

    def _generator_value(self, letter):
        k = self.generators.index(letter)
        return tuple(int(i == k) for i in range(len(self.positions)))

    def to_word(self, g):
        # right-multiply by t_ij^(-v) column by column until g is reduced
        applied = []
        rest = g
        for j in range(self.n, 1, -1):
            for i in range(j - 1, 0, -1):
                k = self.positions.index((i, j))
                v = self.matrix(rest)[i - 1][j - 1]
                letter = self.inverse_letters[k] if v > 0 else self.generators[k]
                for _ in range(abs(v)):
                    rest = self.multiply(rest, self.letter_value(letter))
                    applied.append(letter)
        return tuple(self._inv[x] for x in reversed(applied))

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == len(self.positions)

    def abelianization(self, g):
        return tuple(v for (i, j), v in zip(self.positions, g) if j == i + 1)

    def params(self):
        return {"n": self.n}


# ---------------------------------------------------------------------------
# semidirect products Z^n x_A Z
# ---------------------------------------------------------------------------


def _matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _matvec(a, v):
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def _det(a) -> int:
    return int(round(float(np.linalg.det(np.array(a, dtype=float))))) if len(a) > 3 else _det_small(a)


def _det_small(a) -> int:
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    return sum((-1) ** j * a[0][j] * _det_small([row[:j] + row[j + 1:] for row in a[1:]]) for j in range(n))


def _adjugate_inverse(a):
    """Integer inverse of a unimodular matrix."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [v / piv for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    out = [[m[i][n + j] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in out for v in row):
        raise GroupError("matrix is not invertible over the integers")
    return [[int(v) for v in row] for row in out]


class Semidirect(Group):
    """Z^n x_A Z with (y, z)(y', z') = (y + y', A^{y'} z + z')."""

    family = "semidirect"

    def __init__(self, A, names=None):
        A = [[int(v) for v in row] for row in A]
        n = len(A)
        if n < 1 or any(len(row) != n for row in A):
            raise GroupError("A must be a square matrix")
        if abs(_det_small(A) if n <= 3 else _det(A)) != 1:
            raise GroupError("A must have determinant +1 or -1")
        self.A = A
        self.A_inv = _adjugate_inverse(A)
        self.n = n
        if names is None:
            names = [("t", "T")] + [(f"x{i + 1}", f"X{i + 1}") for i in range(n)]
        super().__init__([g for g, _ in names], [i for _, i in names])
        self._powers = {0: [[int(i == j) for j in range(n)] for i in range(n)]}

    def power(self, k: int):
        p = self._powers.get(k)
        if p is None:
            base = self.A if k > 0 else self.A_inv
            p = self._powers[0]
            for _ in range(abs(k)):
                p = _matmul(p, base)
            if len(self._powers) < 4096:
                self._powers[k] = p
        return p

    def identity(self):
        return (0, (0,) * self.n)

    def multiply(self, g, h):
        y, z = g
        y2, z2 = h
        az = _matvec(self.power(y2), z)
        return (y + y2, tuple(a + b for a, b in zip(az, z2)))

    def inverse(self, g):
        y, z = g
        # (y,z)(-y, w) = (0, A^{-y} z + w) = e
        w = _matvec(self.power(-y), z)
        return (-y, tuple(-v for v in w))

    def _generator_value(self, letter):
        i = self.generators.index(letter)
        if i == 0:
            return (1, (0,) * self.n)
        return (0, tuple(int(j == i - 1) for j in range(self.n)))

    def to_word(self, g):
        y, z = g
        word = [self.generators[0] if y > 0 else self.inverse_letters[0]] * abs(y)
        for i, v in enumerate(z):
            word += [self.generators[i + 1] if v > 0 else self.inverse_letters[i + 1]] * abs(v)
        return tuple(word)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 2 and len(g[1]) == self.n

    def abelianization(self, g):
        return (g[0],)

    @property
    def exponential_growth(self) -> bool:
        ev = np.linalg.eigvals(np.array(self.A, dtype=float))
        return bool(np.any(np.abs(np.abs(ev) - 1.0) > 1e-9))

    def params(self):
        return {"n": self.n, "A": self.A}


# ---------------------------------------------------------------------------
# lamplighter Z_2 wr Z
# ---------------------------------------------------------------------------


class Lamplighter(Group):
    """Pairs (F, z): F a sorted tuple of lit lamps, z the cursor.

    (F, z)(F', z') = (F xor (F' + z), z + z').  ``a`` toggles the lamp at
    the cursor, ``t`` moves the cursor right.  The letter ``A`` is a formal
    inverse of the involution ``a``.
    """

    family = "lamplighter"

    def __init__(self):
        super().__init__(["a", "t"], ["A", "T"])

    def identity(self):
        return ((), 0)

    def multiply(self, g, h):
        f, z = g
        f2, z2 = h
        lit = set(f)
        lit.symmetric_difference_update(x + z for x in f2)
        return (tuple(sorted(lit)), z + z2)

    def inverse(self, g):
        f, z = g
        return (tuple(sorted(x - z for x in f)), -z)

    def _generator_value(self, letter):
        return ((0,), 0) if letter == "a" else ((), 1)

    def letter_value(self, letter):
        if letter == "A":
            return ((0,), 0)
        return super().letter_value(letter)

    def to_word(self, g):
        f, z = g
        word = []
        pos = 0
        for x in f:
            step = x - pos
            word += ["t" if step > 0 else "T"] * abs(step)
            word.append("a")
            pos = x
        step = z - pos
        word += ["t" if step > 0 else "T"] * abs(step)
        return tuple(word)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 2 and list(g[0]) == sorted(set(g[0]))

    def abelianization(self, g):
        return (len(g[0]) % 2, g[1])

    @property
    def exponential_growth(self) -> bool:
        return True


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def _relabel_pairs(used: set, gens, invs, suffix: str):
    out = []
    for g, i in zip(gens, invs):
        g2, i2 = g, i
        while g2 in used or i2 in used:
            g2 += suffix
            i2 += suffix
        used.update((g2, i2))
        out.append((g2, i2))
    return out


class DirectProduct(Group):
    """Pairs (g1, g2) with componentwise multiplication."""

    family = "direct"

    def __init__(self, g1: Group, g2: Group):
        self.factors = (g1, g2)
        used = set(g1.letters)
        names2 = _relabel_pairs(used, g2.generators, g2.inverse_letters, "'")
        self.letter_map = {}
        for g, i in zip(g1.generators, g1.inverse_letters):
            self.letter_map[g] = (0, g)
            self.letter_map[i] = (0, i)
        for (g, i), (g2, i2) in zip(zip(g2.generators, g2.inverse_letters), names2):
            self.letter_map[g2] = (1, g)
            self.letter_map[i2] = (1, i)
        super().__init__(
            list(g1.generators) + [n for n, _ in names2],
            list(g1.inverse_letters) + [n for _, n in names2],
        )

    def identity(self):
        return (self.factors[0].identity(), self.factors[1].identity())

    def multiply(self, g, h):
        return (self.factors[0].multiply(g[0], h[0]), self.factors[1].multiply(g[1], h[1]))

    def inverse(self, g):
        return (self.factors[0].inverse(g[0]), self.factors[1].inverse(g[1]))

    def letter_value(self, letter):
        if letter not in self.letter_map:
            raise GroupError(f"unknown letter {letter!r}")
        side, inner = self.letter_map[letter]
        v = self.factors[side].letter_value(inner)
        return (v, self.factors[1].identity()) if side == 0 else (self.factors[0].identity(), v)

    def local_letter(self, side: int, inner: str) -> str:
        for k, (s, x) in self.letter_map.items():
            if s == side and x == inner:
                return k
        raise GroupError(f"no letter for {inner!r} in factor {side}")

    def to_word(self, g):
        w1 = self.factors[0].to_word(g[0])
        w2 = self.factors[1].to_word(g[1])
        return tuple(w1) + tuple(self.local_letter(1, x) for x in w2)

    def abelianization(self, g):
        return tuple(self.factors[0].abelianization(g[0])) + tuple(self.factors[1].abelianization(g[1]))

    @property
    def exponential_growth(self) -> bool:
        return any(f.exponential_growth for f in self.factors)

    def params(self):
        return {"factors": [f.spec() for f in self.factors]}


class FreeProduct(Group):
    """Alternating tuples of syllables ``(factor, element)``, none trivial."""

    family = "free"

    def __init__(self, g1: Group, g2: Group):
        self.factors = (g1, g2)
        used = set(g1.letters)
        names2 = _relabel_pairs(used, g2.generators, g2.inverse_letters, "'")
        self.letter_map = {}
        for g, i in zip(g1.generators, g1.inverse_letters):
            self.letter_map[g] = (0, g)
            self.letter_map[i] = (0, i)
        for (g, i), (g2, i2) in zip(zip(g2.generators, g2.inverse_letters), names2):
            self.letter_map[g2] = (1, g)
            self.letter_map[i2] = (1, i)
        super().__init__(
            list(g1.generators) + [n for n, _ in names2],
            list(g1.inverse_letters) + [n for _, n in names2],
        )

    def identity(self):
        return ()

    def _append(self, out: list, syl):
        side, x = syl
        if out and out[-1][0] == side:
            y = self.factors[side].multiply(out[-1][1], x)
            out.pop()
            if y != self.factors[side].identity():
                out.append((side, y))
        elif x != self.factors[side].identity():
            out.append((side, x))

    def multiply(self, g, h):
        out = list(g)
        for syl in h:
            self._append(out, syl)
            # once a syllable survives without merging, the rest copies over
        return tuple(out)

    def inverse(self, g):
        return tuple((side, self.factors[side].inverse(x)) for side, x in reversed(g))

    def letter_value(self, letter):
        if letter not in self.letter_map:
            raise GroupError(f"unknown letter {letter!r}")
        side, inner = self.letter_map[letter]
        v = self.factors[side].letter_value(inner)
        if v == self.factors[side].identity():
            return ()
        return ((side, v),)

    def local_letter(self, side: int, inner: str) -> str:
        for k, (s, x) in self.letter_map.items():
            if s == side and x == inner:
                return k
        raise GroupError(f"no letter for {inner!r} in factor {side}")

    def embed(self, side: int, x):
        return () if x == self.factors[side].identity() else ((side, x),)

    def to_word(self, g):
        out = []
        for side, x in g:
            out += [self.local_letter(side, c) for c in self.factors[side].to_word(x)]
        return tuple(out)

    @property
    def exponential_growth(self) -> bool:
        return True

    def params(self):
        return {"factors": [f.spec() for f in self.factors]}


class FiniteExtension(Group):
    """Group G containing H with finite index, elements (h, i) = h * k_i.

    ``action[(i, letter)] = (word over H letters, j)`` expresses
    ``k_i * letter = h' * k_j``.  ``reps[i]`` is a word over ``S`` for
    ``k_i`` (``reps[0]`` must be empty).
    """

    family = "extension"

    def __init__(self, H: Group, ext_names, reps, action, name: str = "extension", check: int = 200):
        self.H = H
        self.reps = [tuple(r) for r in reps]
        if self.reps[0]:
            raise GroupError("the first coset representative must be the identity")
        self.m = len(self.reps)
        self.action = {(int(i), l): (tuple(w), int(j)) for (i, l), (w, j) in action.items()}
        self.name = name
        super().__init__(
            list(H.generators) + [g for g, _ in ext_names],
            list(H.inverse_letters) + [i for _, i in ext_names],
        )
        for i in range(self.m):
            for letter in self.letters:
                if (i, letter) not in self.action:
                    raise GroupError(f"coset table misses entry ({i}, {letter!r})")
        self._rep_values = None
        self._spot_check(check)

    def _apply_letter(self, g, letter):
        h, i = g
        w, j = self.action[(i, letter)]
        return (self.H.multiply(h, self.H.evaluate_word(w)), j)

    def _apply_word(self, g, word):
        for letter in word:
            g = self._apply_letter(g, letter)
        return g

    def identity(self):
        return (self.H.identity(), 0)

    def multiply(self, g, h):
        hh, j = h
        out = self._apply_word(g, self.H.to_word(hh))
        return self._apply_word(out, self.reps[j])

    def letter_value(self, letter):
        if letter not in self._inv:
            raise GroupError(f"unknown letter {letter!r}")
        return self._apply_letter(self.identity(), letter)

    def inverse(self, g):
        word = self.to_word(g)
        return self._apply_word(self.identity(), [self._inv[x] for x in reversed(word)])

    def to_word(self, g):
        h, i = g
        return tuple(self.H.to_word(h)) + self.reps[i]

    def evaluate_word(self, w):
        return self._apply_word(self.identity(), _as_word(w))

    def _spot_check(self, n: int):
        rng = random.Random(12345)
        for _ in range(n):
            a, b, c = (self.evaluate_word(rng.choice(self.letters) for _ in range(6)) for _ in range(3))
            if self.multiply(self.multiply(a, b), c) != self.multiply(a, self.multiply(b, c)):
                raise GroupError("coset table is inconsistent (associativity fails)")
            if self.multiply(a, self.inverse(a)) != self.identity():
                raise GroupError("coset table is inconsistent (inverse law fails)")
        for letter in self.letters:
            g = self.letter_value(letter)
            if self.multiply(g, self.letter_value(self._inv[letter])) != self.identity():
                raise GroupError(f"letter {letter!r} and its inverse do not cancel")

    @property
    def exponential_growth(self) -> bool:
        return self.H.exponential_growth

    def params(self):
        return {"name": self.name, "H": self.H.spec(), "index": self.m}


def infinite_dihedral(H: FreeAbelian | None = None) -> FiniteExtension:
    """D_inf as Z (letters P/N) extended by a flip ``f``."""
    if H is None:
        H = integers("P", "N")
    gp, gn = H.generators[0], H.inverse_letters[0]
    action = {
        (0, gp): ([gp], 0), (1, gp): ([gn], 1),
        (0, gn): ([gn], 0), (1, gn): ([gp], 1),
        (0, "f"): ([], 1), (1, "f"): ([], 0),
        (0, "F"): ([], 1), (1, "F"): ([], 0),
    }
    return FiniteExtension(H, [("f", "F")], [(), ("f",)], action, name="dihedral")


def dihedral_affine(g):
    """2x2 affine matrix of a D_inf element (n, i): x -> (-1)^i x + n."""
    (n,), i = g
    return ((-1) ** i, n)


# ---------------------------------------------------------------------------
# mini-format
# ---------------------------------------------------------------------------


def make_group(spec: dict) -> Group:
    """Build a group from ``{"family": ..., params}``."""
    spec = dict(spec)
    fam = spec.pop("family", None)
    if fam == "zn":
        names = spec.get("names")
        return FreeAbelian(int(spec.get("n", 1)), [tuple(p) for p in names] if names else None)
    if fam == "heisenberg":
        return Heisenberg()
    if fam == "unitriangular":
        return Unitriangular(int(spec.get("n", 3)))
    if fam == "semidirect":
        A = spec["A"]
        if "n" in spec and int(spec["n"]) != len(A):
            raise GroupError("n does not match the size of A")
        return Semidirect(A)
    if fam == "lamplighter":
        return Lamplighter()
    if fam == "direct":
        a, b = spec["factors"]
        return DirectProduct(make_group(a), make_group(b))
    if fam == "free":
        a, b = spec["factors"]
        return FreeProduct(make_group(a), make_group(b))
    if fam == "extension" and spec.get("name") == "dihedral":
        return infinite_dihedral()
    raise GroupError(f"unknown group family {fam!r}")
