"""Deviation h(n), fellow-traveler s(n), almost-all ball statistics and
the symbolic coarse order on growth classes."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, is_dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .automata import PAD, CapExceeded, Dfa, count_by_length, enumerate_upto
from .metrics import DEFAULT_BALL_CAP, Ball, ball, distance, largest_ball
from .representations import CayleyRep, bounded_difference_const

CSV_COLUMNS = ("n", "h_lower", "h_upper", "s", "L_count", "ball", "Q", "fraction")


class MeasurementError(ValueError):
    pass


def _require_group_letters(R: CayleyRep) -> None:
    extra = sorted(set(R.sigma) - set(R.group.letters), key=str)
    if extra:
        raise MeasurementError(
            f"language letters {extra} are not group letters; "
            "re-encode over the generators first (representation name with '-s', or reencode())"
        )


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_words(d: Dfa, length: int, count: int, rng: np.random.Generator) -> list:
    """Uniform random accepted words of one length (weighted descent)."""
    n = d.n_states
    ways = [np.zeros(n, dtype=object) for _ in range(length + 1)]
    ways[0] = np.array([int(a) for a in d.accepting], dtype=object)
    for j in range(1, length + 1):
        prev = ways[j - 1]
        cur = np.zeros(n, dtype=object)
        for q in range(n):
            cur[q] = sum(prev[r] for r in d.table[q] if r >= 0)
        ways[j] = cur
    if ways[length][d.start] == 0:
        return []
    out = []
    for _ in range(count):
        q, word = d.start, []
        for j in range(length, 0, -1):
            pick = int(rng.integers(0, 1 << 62)) % int(ways[j][q])
            for col, r in enumerate(d.table[q]):
                if r < 0:
                    continue
                w = ways[j - 1][r]
                if pick < w:
                    word.append(d.alphabet[col])
                    q = int(r)
                    break
                pick -= w
        out.append(tuple(word))
    return out


# ---------------------------------------------------------------------------
# h(n)
# ---------------------------------------------------------------------------


@dataclass
class HRow:
    n: int
    h_lower: int
    h_upper: int | None
    words: int
    exhaustive: bool = True


def _cummax(values):
    out, best = [], None
    for v in values:
        if v is not None and (best is None or v > best):
            best = v
        out.append(best)
    return out


def measure_h(R: CayleyRep, n: int, cap_words: int = 2_000_000, cap_ball: int = 200_000,
              sample: int = 0, seed: int = 0) -> list:
    """Rows m = 0..n of max d(pi(w), psi(w)) over accepted words of length <= m.

    Distances come as certified intervals; with ``sample > 0`` each length
    is sampled instead of enumerated and rows are flagged non-exhaustive.
    """
    _require_group_letters(R)
    G = R.group
    counts = count_by_length(R.language, n)
    exhaustive = sample <= 0
    if exhaustive and sum(counts) > cap_words:
        raise CapExceeded(f"{sum(counts)} words of length <= {n} exceed the cap {cap_words}")
    near = largest_ball(G, cap_ball, max_radius=n + 2) if cap_ball > 0 else None
    lo = [None] * (n + 1)
    hi = [None] * (n + 1)
    seen = [0] * (n + 1)
    if exhaustive:
        words = enumerate_upto(R.language, n)
    else:
        rng = np.random.default_rng(seed)
        words = (w for m in range(n + 1) for w in sample_words(R.language, m, sample, rng))
    for w in words:
        m = len(w)
        g = G.multiply(G.inverse(G.evaluate_word(w)), R.decode(w))
        b = distance(G, g, ball_=near)
        seen[m] += 1
        if lo[m] is None or b.lower > lo[m]:
            lo[m] = b.lower
        up = b.upper if b.upper is not None else None
        if up is not None and (hi[m] is None or up > hi[m]):
            hi[m] = up
    lo_c, hi_c = _cummax(lo), _cummax(hi)
    rows = []
    total = 0
    for m in range(n + 1):
        total += seen[m]
        rows.append(HRow(m, lo_c[m] or 0, hi_c[m] if hi_c[m] is not None else (0 if lo_c[m] is None else None),
                         total, exhaustive))
    return rows


# ---------------------------------------------------------------------------
# s(n)
# ---------------------------------------------------------------------------


@dataclass
class SRow:
    n: int
    s_lower: int
    s_upper: int


def _steps_to_accept(d: Dfa, n: int) -> np.ndarray:
    """Shortest accepted completion length from each state (n + 1 if none within n)."""
    live = _kernels.live_steps(d.table, d.accepting, n)
    out = np.full(d.n_states, n + 1, dtype=np.int64)
    for j in range(n, -1, -1):
        out[live[j]] = j
    return out


def measure_s(R: CayleyRep, n: int, cap_ball: int = 200_000, cap_configs: int = 5_000_000) -> list:
    """Rows m = 0..n of the fellow-traveler function as a certified interval.

    Runs each multiplier on pairs of prefixes while tracking
    ``g_t = pi(u_t)^-1 pi(v_t)``; only configurations that can still be
    completed to an accepted pair within the bound are kept.
    """
    _require_group_letters(R)
    G = R.group
    e = G.identity()
    near = largest_ball(G, cap_ball, max_radius=2 * n + 2) if cap_ball > 0 else None
    values = {a: G.letter_value(a) for a in G.letters}
    inv_values = {a: G.inverse(v) for a, v in values.items()}
    best_lo = [0] * (n + 1)
    best_hi = [0] * (n + 1)
    cache: dict = {}

    def bound(g):
        b = cache.get(g)
        if b is None:
            b = distance(G, g, ball_=near)
            cache[g] = b
        return b

    for gen in G.generators:
        M = R.multipliers[gen].trim()
        if M.is_empty():
            continue
        need = _steps_to_accept(M, n)
        moves = [
            [(M.alphabet[j], int(r)) for j, r in enumerate(M.table[q]) if r >= 0]
            for q in range(M.n_states)
        ]
        frontier = {(M.start, e)} if need[M.start] <= n else set()
        total = 0
        for t in range(n + 1):
            for q, g in frontier:
                first = t + int(need[q])
                b = bound(g)
                up = min(b.upper, 2 * t) if b.upper is not None else 2 * t
                if b.lower > best_lo[first]:
                    best_lo[first] = b.lower
                if up > best_hi[first]:
                    best_hi[first] = up
            if t == n:
                break
            nxt = set()
            for q, g in frontier:
                for (a, c), r in moves[q]:
                    if t + 1 + need[r] > n:
                        continue
                    h = g if a == PAD else G.multiply(inv_values[a], g)
                    if c != PAD:
                        h = G.multiply(h, values[c])
                    nxt.add((r, h))
            total += len(nxt)
            if total > cap_configs:
                raise CapExceeded(f"more than {cap_configs} prefix configurations")
            frontier = nxt
    lo = _cummax(best_lo)
    hi = _cummax(best_hi)
    return [SRow(m, lo[m], hi[m]) for m in range(n + 1)]


# ---------------------------------------------------------------------------
# almost-all statistics
# ---------------------------------------------------------------------------


@dataclass
class QRow:
    n: int
    ball: int
    Q: int
    fraction: float


@dataclass
class AlmostAll:
    rows: list
    lam: float
    lambda1: float
    lambda2: float
    C: int


def estimate_lambda(sizes: list) -> float:
    """(#B_N / #B_{N-2})^(1/2) at the largest radius N."""
    N = len(sizes) - 1
    if N < 2:
        raise MeasurementError("need balls up to radius 2 at least")
    return math.sqrt(sizes[N] / sizes[N - 2])


def almost_all_stats(R: CayleyRep, n: int, lambda1: float | None = None, lambda2: float | None = None,
                     k_bd: int = 6, cap_ball: int = DEFAULT_BALL_CAP, cap_words: int = 2_000_000) -> AlmostAll:
    """#Q_m / #B_m for m = 0..n.

    ``lambda1`` defaults to half the log of the ball growth rate in base
    |S|; ``lambda2`` defaults to ``C + |psi^-1(e)|`` with ``C`` the
    bounded-difference constant, which bounds ``|w|`` by ``lambda2 * d``
    whenever ``d >= 1``.  The identity (d = 0) counts as a member of Q.
    """
    G = R.group
    if not G.exponential_growth:
        raise MeasurementError(
            f"{G.family} does not have exponential growth; the almost-all statement does not apply"
        )
    B: Ball = ball(G, n, cap_ball)
    sizes = B.sizes()
    lam = estimate_lambda(sizes)
    C = bounded_difference_const(R, k_bd, cap_words)
    if lambda1 is None:
        lambda1 = 0.5 * math.log(lam) / math.log(len(G.letters))
    if lambda2 is None:
        lambda2 = C + len(R.encode(G.identity()))
    inside = [0] * (n + 1)
    for g in B.elements():
        d = B.distance(g)
        w = len(R.encode(g))
        if d == 0 or lambda1 * d <= w <= lambda2 * d:
            inside[d] += 1
    rows, q = [], 0
    for m in range(n + 1):
        q += inside[m]
        rows.append(QRow(m, sizes[m], q, q / sizes[m]))
    return AlmostAll(rows, lam, lambda1, lambda2, C)


# ---------------------------------------------------------------------------
# powers of a generator: short encodings of far elements
# ---------------------------------------------------------------------------


@dataclass
class PowerRow:
    n: int
    word_length: int
    distance_lower: int
    h_lower: int


def power_profile(R: CayleyRep, letter: str, ns) -> list:
    """For g = letter^n: encoding length, distance lower bound, and the
    implied deviation ``d(pi(w), psi(w)) >= d(g) - |w|``."""
    G = R.group
    a = G.letter_value(letter)
    rows = []
    for n in ns:
        g = _power(G, a, n)
        w = R.encode(g)
        lo = distance(G, g).lower
        rows.append(PowerRow(n, len(w), lo, max(0, lo - len(w))))
    return rows


def _power(G, a, n: int):
    out, base = G.identity(), a
    while n:
        if n & 1:
            out = G.multiply(out, base)
        base = G.multiply(base, base)
        n >>= 1
    return out


def fit_log_constant(rows: list) -> float:
    """Least C with word_length <= C log2(n) over the rows (n >= 2)."""
    return max(r.word_length / math.log2(r.n) for r in rows if r.n >= 2)


# ---------------------------------------------------------------------------
# series export
# ---------------------------------------------------------------------------


def measure_series(R: CayleyRep, n: int, rep_id: str, cap_words: int = 2_000_000,
                   cap_ball: int = 200_000, with_s: bool = True) -> dict:
    """All per-length measurements in one table (columns ``CSV_COLUMNS``)."""
    h = measure_h(R, n, cap_words, cap_ball)
    s = measure_s(R, n, cap_ball) if with_s else None
    L = count_by_length(R.language, n)
    G = R.group
    try:
        B = largest_ball(G, cap_ball, max_radius=n)
        sizes = B.sizes()
    except CapExceeded:
        sizes = []
    stats = None
    if G.exponential_growth and len(sizes) == n + 1 and n >= 2:
        stats = almost_all_stats(R, n, cap_ball=cap_ball, cap_words=cap_words)
    rows = []
    total = 0
    for m in range(n + 1):
        total += L[m]
        rows.append({
            "n": m,
            "h_lower": h[m].h_lower,
            "h_upper": h[m].h_upper,
            "s": s[m].s_upper if s else None,
            "L_count": total,
            "ball": sizes[m] if m < len(sizes) else None,
            "Q": stats.rows[m].Q if stats else None,
            "fraction": round(stats.rows[m].fraction, 6) if stats else None,
        })
    meta = {"rep": rep_id, "n": n, "cap_words": cap_words, "cap_ball": cap_ball}
    if stats:
        meta.update(lam=stats.lam, lambda1=stats.lambda1, lambda2=stats.lambda2, C=stats.C)
    if s:
        meta["s_lower"] = [r.s_lower for r in s]
    return {"meta": meta, "rows": rows}


def rows_to_csv(rows: list, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        if is_dataclass(r):
            r = asdict(r)
        w.writerow(["" if r.get(c) is None else r.get(c) for c in columns])
    return buf.getvalue()


def series_to_json(series: dict) -> str:
    return json.dumps(series, indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# function classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionClass:
    """Growth class up to the coarse equivalence.

    ``kind`` is one of zero, const, polylog, exp; ``polylog`` carries
    n^alpha (log n)^a, with alpha = 0 meaning a pure log power.
    """

    kind: str
    alpha: Fraction = Fraction(0)
    a: int = 0

    def __post_init__(self):
        if self.kind not in ("zero", "const", "polylog", "exp"):
            raise ValueError(f"unknown class kind {self.kind!r}")
        if self.kind == "polylog":
            if self.alpha < 0 or self.a < 0:
                raise ValueError("exponents must be nonnegative")
            if self.alpha == 0 and self.a == 0:
                object.__setattr__(self, "kind", "const")

    def key(self) -> tuple:
        tier = {"zero": 0, "const": 1, "polylog": 1, "exp": 2}[self.kind]
        return (tier, self.alpha, self.a)

    def __lt__(self, other):
        return self.key() < other.key()

    def __str__(self):
        if self.kind in ("zero", "const", "exp"):
            return self.kind
        if self.alpha == 1 and self.a == 0:
            return "id"
        parts = []
        if self.alpha:
            parts.append(f"poly:{self.alpha}")
        if self.a:
            parts.append(f"log:{self.a}")
        return "*".join(parts)

    def value(self, x: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "const":
            return 1.0
        if self.kind == "exp":
            return 2.0 ** x
        return float(x) ** float(self.alpha) * (math.log(x) ** self.a if self.a else 1.0)


def Zero() -> FunctionClass:
    return FunctionClass("zero")


def Const() -> FunctionClass:
    return FunctionClass("const")


def LogPow(a: int) -> FunctionClass:
    return FunctionClass("polylog", Fraction(0), int(a))


def PolyLog(alpha, a: int = 0) -> FunctionClass:
    return FunctionClass("polylog", Fraction(alpha), int(a))


def Exp() -> FunctionClass:
    return FunctionClass("exp")


def Identity() -> FunctionClass:
    return PolyLog(1, 0)


def parse_class(text: str) -> FunctionClass:
    """``zero``, ``const``, ``exp``, ``id``, ``poly:3``, ``poly:1/3``,
    ``log:2`` or ``poly:1/2*log:1``."""
    text = text.strip().lower()
    if text in ("zero", "const", "exp"):
        return FunctionClass(text)
    if text in ("id", "identity"):
        return Identity()
    alpha, a = Fraction(0), 0
    for part in text.split("*"):
        name, _, val = part.partition(":")
        try:
            if name == "poly":
                alpha = Fraction(val)
            elif name == "log":
                a = int(val)
            else:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse function class {text!r}") from None
    if alpha == 0 and a == 0:
        raise ValueError(f"cannot parse function class {text!r}")
    return FunctionClass("polylog", alpha, a)


def coarse_compare(f: FunctionClass, g: FunctionClass) -> int:
    """-1, 0 or 1 as f is strictly below, equivalent to, or above g."""
    kf, kg = f.key(), g.key()
    return (kf > kg) - (kf < kg)


def dehn_lower_bound(dehn: FunctionClass) -> FunctionClass | None:
    """Lower bound on h implied by a Dehn function; None if nothing follows."""
    if dehn.kind == "exp":
        return Identity()
    if dehn.kind == "polylog" and dehn.a == 0 and dehn.alpha > 0:
        d = dehn.alpha
        if d <= 2:
            return None
        return PolyLog((d - 2) / d, 0)
    raise ValueError(f"expected n^d or exp as a Dehn function, got {dehn}")


@dataclass(frozen=True)
class Superadditivity:
    holds: bool
    n0: int | None = None
    witness: tuple | None = None


def superadditivity_check(f: FunctionClass) -> Superadditivity:
    """Whether f(x) + f(y) <= f(x + y) for all x, y >= n0."""
    if f.kind in ("zero", "exp"):
        return Superadditivity(True, 1)
    if f.kind == "polylog" and f.alpha >= 1:
        return Superadditivity(True, 1)
    for k in range(1, 200):
        x = 2 ** k
        if 2 * f.value(x) > f.value(2 * x):
            return Superadditivity(False, None, (x, x))
    return Superadditivity(False, None, None)
