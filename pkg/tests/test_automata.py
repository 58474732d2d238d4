import itertools
import json
import random

import pytest
from conftest import small_dfas
from hypothesis import given
from hypothesis import strategies as st
from regex import regex

from cayleyauto.automata import (
    PAD,
    AlphabetMismatch,
    AutomatonError,
    Dfa,
    MalformedConvolution,
    Nfa,
    automaton_from_json,
    classify_growth,
    combine,
    convolve,
    count_by_length,
    count_upto,
    deconvolve,
    determinize_minimize,
    difference,
    enumerate_upto,
    intersect,
    load_dfa,
    padding_ok,
    polynomial_fit_residual,
    project,
    save_dfa,
    union,
)
from cayleyauto.encodings import BINARY_ALPHABET, encode_binary, successor_automaton
from cayleyauto.relations import from_tracks, identity_relation, restrict


def words_of(d, n):
    return set(enumerate_upto(d, n))


def brute(d, n):
    """Accepted words by running every word over the alphabet."""
    out = set()
    for m in range(n + 1):
        for w in itertools.product(d.alphabet, repeat=m):
            if d.accepts(w):
                out.add(w)
    return out


# -- convolution -------------------------------------------------------------


def test_convolve_examples():
    assert convolve(["ab", "a"]) == (("a", "a"), ("b", PAD))
    assert convolve(["", "xy"]) == ((PAD, "x"), (PAD, "y"))
    assert convolve(["1", "101", ""]) == (("1", "1", PAD), (PAD, "0", PAD), (PAD, "1", PAD))


def test_convolve_needs_tracks():
    with pytest.raises(AutomatonError):
        convolve([])


def test_deconvolve_examples():
    assert deconvolve([("a", "a"), ("b", PAD)]) == (("a", "b"), ("a",))
    assert deconvolve([], 2) == ((), ())
    with pytest.raises(MalformedConvolution):
        deconvolve([("a", PAD), (PAD, "b")])


def test_convolution_round_trip_random():
    r = random.Random(7)
    for _ in range(10_000):
        k = r.randint(1, 4)
        ws = ["".join(r.choice("01+-") for _ in range(r.randint(0, 6))) for _ in range(k)]
        if not any(ws):
            continue
        cw = convolve(ws)
        assert padding_ok(cw)
        assert tuple("".join(t) for t in deconvolve(cw, k)) == tuple(ws)


@given(st.lists(st.text("abc", max_size=5), min_size=1, max_size=3))
def test_convolution_round_trip(ws):
    cw = convolve(ws)
    assert len(cw) == max(len(w) for w in ws)
    assert all(any(c != PAD for c in sym) for sym in cw)
    assert tuple("".join(t) for t in deconvolve(cw, len(ws))) == tuple(ws)


# -- boolean operations ---------------------------------------------------------


def test_combine_examples():
    astar, aa = regex("a*"), regex("(aa)*")
    assert intersect(astar, aa).same_language(aa)
    L = regex("(a|b)*b")
    assert union(Dfa.empty(L.alphabet), L).same_language(L)
    assert difference(L, L).is_empty()


def test_combine_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        intersect(regex("a*"), regex("(a|b)*"))
    with pytest.raises(AutomatonError):
        combine(regex("a*"), regex("a*"), "xor")


@given(small_dfas(), small_dfas())
def test_combine_matches_sets(a, b):
    A, B = words_of(a, 6), words_of(b, 6)
    assert words_of(intersect(a, b), 6) == A & B
    assert words_of(union(a, b), 6) == A | B
    assert words_of(difference(a, b), 6) == A - B


# -- determinization and minimization -------------------------------------------


def test_determinize_a_or_ab():
    n = Nfa.literal("a", ("a", "b")).union(Nfa.literal("ab", ("a", "b")))
    d = determinize_minimize(n)
    assert d.n_states == 3
    assert words_of(d, 6) == {("a",), ("a", "b")}


def test_minimal_is_fixpoint():
    d = regex("(a|b)*b")
    m = d.minimize()
    assert m.n_states == d.n_states
    assert (m.table == d.table).all() and m.start == d.start


def test_unreachable_states_dropped():
    d = Dfa(("a",), [[0], [1], [1]], 0, [True, True, False])
    m = determinize_minimize(d)
    assert m.n_states == 1
    assert m.same_language(regex("a*"))


@given(small_dfas())
def test_minimize_preserves_language(d):
    m = d.minimize()
    assert difference(d, m).is_empty() and difference(m, d).is_empty()
    assert m.n_states <= max(d.trim().n_states, 1)
    assert words_of(m, 5) == brute(d, 5)


# -- projection -----------------------------------------------------------------


def test_project_equality_gives_domain():
    L = regex("(ab)*a")
    assert from_tracks(project(identity_relation(L), 1)).same_language(L)


def test_project_empty():
    R = Dfa.empty((("a", "a"), ("a", PAD)))
    assert project(R, 0).is_empty()


def test_project_successor_on_naturals():
    naturals = Nfa.literal("+", BINARY_ALPHABET).concat(Nfa.any_of("01", BINARY_ALPHABET).plus()).determinize()
    rel = restrict(successor_automaton(), left=naturals)
    images = {"".join(w) for w in enumerate_upto(from_tracks(project(rel, 0)), 6)}
    assert images == {encode_binary(n) for n in range(1, 32)}


def test_project_bad_index():
    with pytest.raises(AutomatonError):
        project(identity_relation(regex("a*")), 2)


# -- enumeration and counting ----------------------------------------------------


def test_enumerate_examples():
    assert list(enumerate_upto(regex("a*"), 2)) == [(), ("a",), ("a", "a")]
    assert list(enumerate_upto(Dfa.empty(("a",)), 100)) == []
    assert list(enumerate_upto(regex("(a|b)*b"), 2)) == [("b",), ("a", "b"), ("b", "b")]


@given(small_dfas())
def test_enumeration_order_and_counts(d):
    ws = list(enumerate_upto(d, 5))
    rank = {s: i for i, s in enumerate(d.alphabet)}
    keys = [(len(w), [rank[c] for c in w]) for w in ws]
    assert keys == sorted(keys)
    assert set(ws) == brute(d, 5)
    counts = count_by_length(d, 5)
    assert counts == [sum(1 for w in ws if len(w) == m) for m in range(6)]
    assert count_upto(d, 5) == len(ws)


def test_count_examples():
    assert count_by_length(regex("a*b*"), 3) == [1, 2, 3, 4]
    assert count_by_length(regex("(a|b)*"), 3) == [1, 2, 4, 8]
    assert count_by_length(regex("(ab)*"), 4) == [1, 0, 1, 0, 1]


def test_count_big_integers():
    d = regex("(a|b|c|d)*")
    assert count_by_length(d, 40)[-1] == 4 ** 40


# -- growth -------------------------------------------------------------------------


def test_growth_examples():
    assert str(classify_growth(regex("a*b*"))) == "polynomial:1"
    assert classify_growth(regex("(a|b)*")).exponential
    assert str(classify_growth(Dfa.empty(("a",)))) == "polynomial:0"


GROWTH_CORPUS = [
    "a*", "a*b*", "(a|b)*", "(ab)*", "a*b*c*", "(a|bb)*", "(aa|bb)*", "a*(b|c)*", "ab|ba|aab",
    "(abc)*a*", "a*b*a*b*", "(ab|ba)*", "(a|b)*c(a|b)*", "a*ba*", "(aab)*(bba)*", "(a|b)(a|b)(a|b)",
    "(ab*)*", "a*b*c*a*", "(a|bbb)*", "(aaa)*b(bb)*",
]
# Lengths up to 14 cannot expose these asymptotics: (ab)* alternates 0/1 so its
# counts have no polynomial interpolant, and (a|bbb)* grows like 1.47^n.
SHORT_HORIZON = {"(ab)*", "(a|bbb)*"}


@pytest.mark.parametrize("expr", [
    pytest.param(e, marks=pytest.mark.xfail(strict=True, reason="length 14 too short for this language"))
    if e in SHORT_HORIZON else e
    for e in GROWTH_CORPUS
])
def test_growth_agrees_with_polynomial_fit(expr):
    d = regex(expr)
    exceeds = polynomial_fit_residual(count_by_length(d, 14)) > 0
    assert classify_growth(d).exponential == exceeds


@pytest.mark.parametrize("expr", GROWTH_CORPUS)
def test_polynomial_degree_bounds_counts(expr):
    d = regex(expr)
    g = classify_growth(d)
    if g.exponential:
        return
    counts = count_by_length(d, 60)
    # words of length exactly n are O(n^degree): the ratio stays bounded
    ratio = [c / (n + 1) ** g.degree for n, c in enumerate(counts)]
    assert max(ratio[30:]) <= 2 * max(ratio[:30]) + 1e-9


def test_polynomial_fit_residual():
    assert polynomial_fit_residual([n ** 10 for n in range(15)]) == 0
    assert polynomial_fit_residual([3 * n ** 4 + 1 for n in range(15)]) == 0
    assert polynomial_fit_residual([2 ** n for n in range(15)]) > 0
    with pytest.raises(AutomatonError):
        polynomial_fit_residual([1, 2, 3])


# -- JSON ---------------------------------------------------------------------------


def test_json_round_trip(tmp_path):
    d = successor_automaton()
    path = tmp_path / "succ.json"
    save_dfa(d, path)
    back = load_dfa(path)
    assert back.same_language(d)
    assert back.alphabet == d.alphabet


def test_json_rejects_unknown_fields():
    data = regex("a*").to_json()
    data["extra"] = 1
    with pytest.raises(AutomatonError):
        automaton_from_json(data)


def test_json_accepts_empty_flag():
    d = regex("a+")
    data = json.loads(json.dumps(d.to_json()))
    assert not automaton_from_json(data).accepts(())


def test_dfa_is_immutable():
    d = regex("a*")
    with pytest.raises(AttributeError):
        d.start = 1
    with pytest.raises(ValueError):
        d.table[0, 0] = 3
