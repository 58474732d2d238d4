"""Word metrics: BFS balls and certified distance bounds."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .automata import CapExceeded
from .groups import (
    DirectProduct,
    FiniteExtension,
    FreeAbelian,
    FreeProduct,
    Group,
    Heisenberg,
    Lamplighter,
    Semidirect,
    Unitriangular,
)

DEFAULT_BALL_CAP = 2_000_000


@dataclass(frozen=True)
class Ball:
    """Elements of word length at most ``radius`` with their distances."""

    radius: int
    dist: dict
    order: tuple

    def __contains__(self, g) -> bool:
        return g in self.dist

    def __len__(self) -> int:
        return len(self.dist)

    def distance(self, g):
        return self.dist.get(g)

    def elements(self):
        return iter(self.order)

    def sphere_sizes(self) -> list:
        sizes = [0] * (self.radius + 1)
        for d in self.dist.values():
            sizes[d] += 1
        return sizes

    def sizes(self) -> list:
        """#B_0, ..., #B_radius."""
        out, total = [], 0
        for s in self.sphere_sizes():
            total += s
            out.append(total)
        return out

    def within(self, r: int) -> "Ball":
        if r >= self.radius:
            return self
        keep = tuple(g for g in self.order if self.dist[g] <= r)
        return Ball(r, {g: self.dist[g] for g in keep}, keep)


def ball(G: Group, r: int, cap: int = DEFAULT_BALL_CAP) -> Ball:
    """Breadth-first ball; letters are tried in the group's declared order."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    cached = _BALLS.get(_gkey(G))
    if cached is not None and cached.radius >= r:
        out = cached.within(r)
        if len(out) > cap:
            raise CapExceeded(f"ball of radius {r} exceeds the cap of {cap} elements")
        return out
    e = G.identity()
    dist = {e: 0}
    order = [e]
    frontier = [e]
    values = [G.letter_value(a) for a in G.letters]
    for d in range(1, r + 1):
        nxt = []
        for g in frontier:
            for v in values:
                h = G.multiply(g, v)
                if h not in dist:
                    dist[h] = d
                    order.append(h)
                    nxt.append(h)
                    if len(order) > cap:
                        raise CapExceeded(f"ball of radius {r} exceeds the cap of {cap} elements")
        frontier = nxt
    out = Ball(r, dist, tuple(order))
    if cached is None or cached.radius < r:
        _BALLS[_gkey(G)] = out
    return out


_BALLS: dict = {}


def _gkey(G: Group) -> str:
    return json.dumps(G.spec(), sort_keys=True, default=str)


def largest_ball(G: Group, cap: int, max_radius: int = 64) -> Ball:
    """Largest ball whose size stays under ``cap``."""
    best = ball(G, 0, cap)
    for r in range(1, max_radius + 1):
        try:
            best = ball(G, r, cap)
        except CapExceeded:
            break
    return best


# ---------------------------------------------------------------------------
# distance bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistanceBound:
    lower: int
    upper: int | None
    certificates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower < 0 or (self.upper is not None and self.upper < self.lower):
            raise ValueError(f"inconsistent bound [{self.lower}, {self.upper}]")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def __add__(self, other: "DistanceBound") -> "DistanceBound":
        up = None if self.upper is None or other.upper is None else self.upper + other.upper
        lo_c = "+".join(sorted({self.certificates.get("lower", "?"), other.certificates.get("lower", "?")}))
        up_c = "+".join(sorted({self.certificates.get("upper", "?"), other.certificates.get("upper", "?")}))
        return DistanceBound(self.lower + other.lower, up, {"lower": lo_c, "upper": up_c})


def _exact(d: int, how: str) -> DistanceBound:
    return DistanceBound(d, d, {"lower": how, "upper": how})


def lamplighter_length(g) -> int:
    """Lit lamps plus the shorter of the two sweeps ending at the cursor."""
    lit, z = g
    lo = min(lit + (0, z))
    hi = max(lit + (0, z))
    left_first = -lo + (hi - lo) + (hi - z)
    right_first = hi + (hi - lo) + (z - lo)
    return len(lit) + min(left_first, right_first)


def heisenberg_lower(x: int, y: int, z: int) -> int:
    """Rigorous lower bound for the word length of (x, y, z) in H3.

    A word with ``a`` letters s/S, ``b`` letters p/P and ``c`` letters q/Q
    reaches at most ``|z| <= a*b + c``, so the length is at least
    ``min a + b + max(0, |z| - a*b)`` over ``a >= |x|, b >= |y|``.
    """
    X, Y, Z = abs(x), abs(y), abs(z)
    if Z <= X * Y:
        return X + Y
    best = X + Z if Y == 0 else None
    if X == 0:
        best = Y + Z if best is None else min(best, Y + Z)
    a0 = max(X, 1)
    a1 = max(a0, -(-Z // max(Y, 1)))
    if a1 - a0 <= 200_000:
        for a in range(a0, a1 + 1):
            cost = a + max(Y, -(-Z // a))
            best = cost if best is None else min(best, cost)
        return best
    # real relaxation, still a valid bound
    root = math.isqrt(Z)
    if a0 <= root:
        relax = math.isqrt(4 * Z - 1) + 1
    else:
        relax = a0 + max(Y, -(-Z // a0))
    return relax if best is None else min(best, relax)


def _commutator_cost(r: int) -> int:
    """Length of an explicit word for q^r built from commutators."""
    R = abs(r)
    best = R
    root = math.isqrt(R)
    for a in range(max(1, root - 2), root + 3):
        for b in (R // a, -(-R // a)):
            if b > 0:
                best = min(best, 2 * a + 2 * b + abs(R - a * b))
    return best


def heisenberg_upper(x: int, y: int, z: int) -> int:
    """Length of an explicit word: s^x p^y (or p^y s^x) followed by q^r."""
    return abs(x) + abs(y) + min(_commutator_cost(z - x * y), _commutator_cost(z))


def _abel_lower(G: Group, g) -> int:
    ab = getattr(G, "abelianization", None)
    if ab is None:
        return 0
    try:
        return sum(abs(v) for v in ab(g))
    except NotImplementedError:
        return 0


def family_bound(G: Group, g) -> DistanceBound:
    """Distance interval from closed forms and explicit words, no search."""
    if isinstance(G, FreeAbelian):
        return _exact(sum(abs(v) for v in g), "l1")
    if isinstance(G, Lamplighter):
        return _exact(lamplighter_length(g), "sweep")
    if isinstance(G, Heisenberg):
        x, y, z = g
        return DistanceBound(heisenberg_lower(x, y, z), heisenberg_upper(x, y, z),
                             {"lower": "area", "upper": "commutator-word"})
    if isinstance(G, Unitriangular) and G.n == 3:
        m12, m13, m23 = g
        return DistanceBound(heisenberg_lower(m12, m23, m13), heisenberg_upper(m12, m23, m13),
                             {"lower": "area", "upper": "commutator-word"})
    if isinstance(G, DirectProduct):
        return family_bound(G.factors[0], g[0]) + family_bound(G.factors[1], g[1])
    if isinstance(G, FreeProduct):
        out = _exact(0, "empty")
        for side, x in g:
            out = out + family_bound(G.factors[side], x)
        return out
    if isinstance(G, FiniteExtension) and G.name == "dihedral" and isinstance(G.H, FreeAbelian):
        (n,), i = g
        return _exact(abs(n) + i, "dihedral")
    if isinstance(G, Semidirect):
        lower = abs(g[0])
    else:
        lower = _abel_lower(G, g)
    if g != G.identity():
        lower = max(lower, 1)
    return DistanceBound(lower, len(G.to_word(g)), {"lower": "abelianization", "upper": "normal-form-word"})


def distance(G: Group, g, cap: int = 0, ball_: Ball | None = None) -> DistanceBound:
    """Exact when a formula applies or ``g`` lies in a BFS ball within ``cap``."""
    fb = family_bound(G, g)
    if fb.exact:
        return fb
    b = ball_
    if b is None and cap > 0:
        b = largest_ball(G, cap)
    if b is not None:
        d = b.distance(g)
        if d is not None:
            return _exact(d, "bfs")
        # outside the ball: at least radius + 1
        if b.radius + 1 > fb.lower:
            fb = DistanceBound(b.radius + 1, max(fb.upper, b.radius + 1) if fb.upper is not None else None,
                               {**fb.certificates, "lower": "bfs-radius"})
    return fb


def path_point(G: Group, w, t: int):
    """Element reached after the first ``t`` letters of ``w``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    w = tuple(w)
    return G.evaluate_word(w[:t])


def path_points(G: Group, w) -> list:
    """All prefix values, index t for t = 0..|w|."""
    out = [G.identity()]
    for a in w:
        out.append(G.multiply(out[-1], G.letter_value(a)))
    return out
