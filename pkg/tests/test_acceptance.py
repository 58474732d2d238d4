"""Acceptance criteria, one test each.

Every test prints a single ``criterion N PASS|FAIL <seconds>s <title>`` line
(also collected into the terminal summary) and asserts its runtime budget.
"""

import contextlib
import random
import time

import numpy as np
from conftest import ACCEPTANCE_LINES

from cayleyauto.automata import classify_growth, count_by_length, enumerate_upto, polynomial_fit_residual
from cayleyauto.foquery import build_heisenberg_relations, encode_h, eta_addition, eval_formula
from cayleyauto.measurement import (
    Exp,
    Identity,
    PolyLog,
    almost_all_stats,
    dehn_lower_bound,
    fit_log_constant,
    measure_h,
    measure_s,
    power_profile,
    superadditivity_check,
)
from cayleyauto.relations import as_tracks, from_tracks, identity_relation, project
from cayleyauto.representations import (
    BUILTINS,
    builtin,
    lamplighter_decode,
    lamplighter_encode,
    verify_rep,
)


@contextlib.contextmanager
def criterion(num, title, budget):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        took = time.perf_counter() - start
        ok = ok and took < budget
        line = f"criterion {num} {'PASS' if ok else 'FAIL'} {took:.2f}s {title}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert took < budget, f"criterion {num} took {took:.1f}s, budget {budget}s"


def test_criterion_01_literal_encodings():
    lang = builtin("lamplighter").language
    with criterion(1, "lamplighter string encodings", 1.0):
        g1, g2 = ((1, 2), 3), ((-4, -3, -2), -3)
        assert "".join(lamplighter_encode(g1)) == "+1#11C0"
        assert "".join(lamplighter_encode(g2)) == "-100#1C11"
        for g in (g1, g2):
            w = lamplighter_encode(g)
            assert lamplighter_decode(w) == g
            assert lang.accepts(w)


VERIFY_K = {"unary-z": 12, "dihedral": 9, "direct-zz": 8, "free-zz": 8}


def test_criterion_02_verification():
    with criterion(2, "verify_rep on every built-in representation", 300):
        for name in BUILTINS:
            rep = verify_rep(builtin(name), VERIFY_K.get(name, 6), cap=2_000_000)
            assert rep.passed, (name, rep.counterexample)


def test_criterion_03_unary_h_zero():
    with criterion(3, "h = 0 on the unary representation", 10):
        rows = measure_h(builtin("unary-z"), 12)
        assert all(r.h_lower == 0 and r.h_upper == 0 for r in rows)


def test_criterion_04_exponential_deviation():
    with criterion(4, "exponential h for binary Z and Heisenberg", 600):
        rows = measure_h(builtin("binary-z-s"), 22)
        for n in range(8, 23):
            assert rows[n].h_lower >= 2 ** (n // 2 - 2), n
        rows = measure_h(builtin("heisenberg-s"), 10)
        ns = np.arange(5, 11)
        slope = np.polyfit(ns, np.log([rows[n].h_lower for n in ns]), 1)[0]
        print(f"log h_lower slope over n=5..10: {slope:.3f}")
        assert slope >= 0.3


def test_criterion_05_short_powers():
    R = builtin("heisenberg")
    with criterion(5, "encodings of s^n have logarithmic length", 60):
        rows = power_profile(R, "s", [2 ** k for k in range(1, 15)] + list(range(3, 2 ** 14, 97)))
        rows.sort(key=lambda r: r.n)
        early = [r for r in rows if r.n <= 2 ** 7]
        C = fit_log_constant(early)
        assert fit_log_constant(rows) <= C
        for r in rows:
            assert r.distance_lower == r.n
            assert r.h_lower >= r.n - r.word_length
            if r.n >= 16:
                # n - |w| >= n/2 >= 2^(|w|/C) / 2
                assert r.h_lower >= 2 ** (r.word_length / C) / 2


FELLOW = ["unary-z", "binary-z-s", "heisenberg-s", "ut3-s", "lamplighter-s", "direct-zz", "free-zz", "dihedral"]


def test_criterion_06_fellow_traveler():
    with criterion(6, "s(n) <= 2 h(n) + 4T + 1 and s(n) <= 2n", 600):
        for name in FELLOW:
            R = builtin(name)
            T = R.max_multiplier_states()
            for hr, sr in zip(measure_h(R, 8), measure_s(R, 8)):
                assert sr.s_upper <= 2 * hr.h_upper + 4 * T + 1, (name, sr.n)
                assert sr.s_upper <= 2 * sr.n, (name, sr.n)


# languages built from unary codes only; free-zz is unary too but its
# language grows exponentially like the free product itself
UNARY_BASED = {"unary-z", "direct-zz", "dihedral"}


def test_criterion_07_growth_classifier():
    with criterion(7, "growth verdicts agree with counts to length 14", 60):
        for name in BUILTINS:
            lang = builtin(name).language
            verdict = classify_growth(lang)
            assert verdict.exponential == (name not in UNARY_BASED), name
            residual = polynomial_fit_residual(count_by_length(lang, 14))
            assert verdict.exponential == (residual > 0), (name, residual)


def test_criterion_08_first_order_engine():
    with criterion(8, "addition from the first-order formula", 300):
        rels = build_heisenberg_relations()
        eta = eta_addition(rels)

        def h(v):
            return encode_h(v, 0)

        for x in range(-64, 65):
            for y in range(-64, 65):
                assert eta.accepts(h(x), h(y), h(x + y))
                assert not eta.accepts(h(x), h(y), h(x + y + 1))
        r = random.Random(1)
        for _ in range(1000):
            x, y = r.randrange(2 ** 30), r.randrange(2 ** 30)
            assert eta.accepts(h(x), h(y), h(x + y))
            assert not eta.accepts(h(x), h(y), h(x + y - 1))

        # unit properties, by language equality
        env = rels.env()
        one = eval_formula("R0(x,y)", env, rels.L_H).automaton
        assert eval_formula("R0(x,y) & R0(x,y)", env, rels.L_H).automaton.same_language(one)
        proj = eval_formula("exists y R0(x,y)", env, rels.L_H).automaton
        assert from_tracks(proj).same_language(from_tracks(project(one, 1)))
        eq = identity_relation(rels.L_H)
        assert from_tracks(eval_formula("exists y Eq(x,y)", {"Eq": eq}, rels.L_H).automaton).same_language(rels.L_H)
        neg = eval_formula("~LH1(x)", {"LH1": as_tracks(rels.L_H1)}, rels.L_H).automaton
        for w in enumerate_upto(neg, 4):
            u = tuple(s[0] for s in w)
            assert rels.L_H.accepts(u) and not rels.L_H1.accepts(u)


def test_criterion_09_almost_all():
    with criterion(9, "almost all lamplighter ball elements in Q_n", 600):
        res = almost_all_stats(builtin("lamplighter"), 9)
        fr = [r.fraction for r in res.rows]
        print("fractions n=4..9:", [round(f, 4) for f in fr[4:]])
        assert fr[7] <= fr[8] <= fr[9]
        assert fr[9] >= 0.8


def test_criterion_10_bound_table():
    with criterion(10, "Dehn lower bounds and superadditivity", 1.0):
        assert dehn_lower_bound(PolyLog(3)) == PolyLog("1/3")
        assert dehn_lower_bound(Exp()) == Identity()
        for f in (Identity(), Exp()):
            sa = superadditivity_check(f)
            assert sa.holds and sa.n0 == 1


def test_criterion_11_combinators():
    with criterion(11, "products and extensions verify with bounded h", 300):
        for name, k in (("direct-zz", 8), ("free-zz", 8), ("dihedral", 9)):
            assert verify_rep(builtin(name), k).passed, name
        unary = measure_h(builtin("unary-z"), 8)
        for name in ("direct-zz", "free-zz"):
            for r, a in zip(measure_h(builtin(name), 8), unary):
                assert r.h_upper <= a.h_lower + a.h_lower, (name, r.n)
        for r, a in zip(measure_h(builtin("dihedral"), 8), unary):
            assert r.h_upper <= a.h_lower + 2, ("dihedral", r.n)
