import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cayleyauto.automata import PAD, AutomatonError, Dfa, convolve, deconvolve, enumerate_upto
from cayleyauto.encodings import decode_binary, encode_binary, successor_automaton
from cayleyauto.relations import (
    Transducer,
    arity,
    as_tracks,
    compose,
    copy_relation,
    from_tracks,
    identity_relation,
    join,
    permute,
    restrict,
    transpose,
    tuple_language,
    union_rel,
)
from regex import regex

AB = ("a", "b")


def tuples_of(rel, n, k=None):
    k = k or arity(rel)
    return {tuple("".join(t) for t in deconvolve(w, k)) for w in enumerate_upto(rel, n)}


def rel_from(pairs):
    words = [convolve(list(p)) for p in pairs]
    syms = sorted({s for w in words for s in w})
    return Dfa.from_words(words, syms)


word_sets = st.sets(st.tuples(st.text("ab", max_size=3), st.text("ab", max_size=3)).filter(any),
                    min_size=1, max_size=8)


@given(word_sets, word_sets)
def test_join_is_natural_join(r, s):
    R, S = rel_from(r), rel_from(s)
    j, names = join(R, ("x", "y"), S, ("y", "z"))
    assert names == ("x", "y", "z")
    want = {(x, y, z) for (x, y) in r for (y2, z) in s if y == y2}
    assert tuples_of(j, 3, 3) == want


@given(word_sets, word_sets)
def test_compose_matches_sets(r, s):
    want = {(x, z) for (x, y) in r for (y2, z) in s if y == y2}
    got = compose(rel_from(r), rel_from(s))
    assert (tuples_of(got, 3, 2) if got.alphabet else set()) == want


@given(word_sets)
def test_transpose_swaps(r):
    assert tuples_of(transpose(rel_from(r)), 3) == {(y, x) for x, y in r}


def test_join_same_track_twice():
    # joining R with itself on (x,y) is R
    R = successor_automaton()
    j, names = join(R, ("x", "y"), R, ("x", "y"))
    assert names == ("x", "y") and j.same_language(R)


def test_join_rejects_repeated_names():
    with pytest.raises(AutomatonError):
        join(successor_automaton(), ("x", "x"), successor_automaton(), ("y", "z"))


def test_successor_composed_is_plus_two():
    s = successor_automaton()
    two = compose(s, s)
    pairs = {(decode_binary(a), decode_binary(b)) for a, b in tuples_of(two, 6)}
    assert pairs and all(b == a + 2 for a, b in pairs)
    for z in range(-40, 40):
        assert two.accepts(convolve([encode_binary(z), encode_binary(z + 2)]))


def test_restrict_left_and_right():
    s = successor_automaton()
    pos = Dfa.from_words([encode_binary(n) for n in range(1, 40)], ("+", "-", "0", "1"))
    left = restrict(s, left=pos)
    assert {decode_binary(a) for a, _ in tuples_of(left, 7)} <= set(range(1, 40))
    right = restrict(s, right=pos)
    assert {decode_binary(b) for _, b in tuples_of(right, 7)} == set(range(1, 40))


def test_permute_three_tracks():
    w = convolve(["a", "bb", "b"])
    d = Dfa.from_words([w], sorted(set(w)))
    p = permute(d, (2, 0, 1))
    assert tuples_of(p, 3, 3) == {("b", "a", "bb")}


def test_tuple_language():
    t = tuple_language([regex("a*"), regex("b")])
    assert tuples_of(t, 3, 2) == {("", "b"), ("a", "b"), ("aa", "b"), ("aaa", "b")}


def test_identity_and_tracks():
    L = regex("(ab)*")
    assert tuples_of(identity_relation(L), 4) == {("", ""), ("ab", "ab"), ("abab", "abab")}
    assert from_tracks(as_tracks(L)).same_language(L)
    with pytest.raises(AutomatonError):
        from_tracks(identity_relation(L))


def test_union_rel_merges_alphabets():
    a = rel_from([("a", "a")])
    b = rel_from([("b", "")])
    assert tuples_of(union_rel(a, b), 2) == {("a", "a"), ("b", "")}


def test_copy_relation():
    c = copy_relation(AB)
    for w in itertools.product(AB, repeat=3):
        assert c.accepts(tuple((x, x) for x in w))
    one = copy_relation(AB, star=False)
    assert tuples_of(one, 3) == {("a", "a"), ("b", "b")}


def test_transducer_to_sync_shift():
    # w -> w with one trailing b appended, lag one letter
    t = Transducer.copy(AB).star() + Transducer.pair("", "b")
    rel = t.to_sync(lag=1)
    got = tuples_of(rel, 4)
    want = {("".join(w), "".join(w) + "b") for m in range(4) for w in itertools.product(AB, repeat=m)}
    assert got == want


def test_padding_only_before_end():
    s = successor_automaton()
    for w in enumerate_upto(s, 5):
        for track in range(2):
            col = [sym[track] for sym in w]
            if PAD in col:
                assert all(c == PAD for c in col[col.index(PAD):])
