import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cayleyauto import _kernels

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not importable")


@st.composite
def tables(draw, total=False):
    n = draw(st.integers(1, 12))
    m = draw(st.integers(1, 4))
    lo = 0 if total else -1
    cells = draw(st.lists(st.integers(lo, n - 1), min_size=n * m, max_size=n * m))
    acc = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return np.array(cells, dtype=np.int32).reshape(n, m), np.array(acc, dtype=np.bool_)


def same_partition(a, b):
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


@needs_numba
@given(tables(), st.integers(0, 10))
def test_count_and_live_parity(tab, n):
    t, acc = tab
    fast, slow = _kernels.numba_impl, _kernels.numpy_impl
    assert np.array_equal(fast.count_by_length(t, np.int32(0), acc, n), slow.count_by_length(t, np.int32(0), acc, n))
    assert np.array_equal(fast.live_steps(t, acc, n), slow.live_steps(t, acc, n))
    assert np.array_equal(fast.bfs_order(t, np.int32(0)), slow.bfs_order(t, np.int32(0)))


@needs_numba
@given(tables(), st.data())
def test_run_words_parity(tab, data):
    t, _ = tab
    m = t.shape[1]
    rows = data.draw(st.integers(0, 20))
    width = data.draw(st.integers(0, 8))
    words = np.array(data.draw(st.lists(st.integers(0, m - 1), min_size=rows * width, max_size=rows * width)),
                     dtype=np.int32).reshape(rows, width)
    lengths = np.array(data.draw(st.lists(st.integers(0, width), min_size=rows, max_size=rows)), dtype=np.int64)
    a = _kernels.numba_impl.run_words(t, np.int32(0), words, lengths)
    b = _kernels.numpy_impl.run_words(t, np.int32(0), words, lengths)
    assert np.array_equal(a, b)


@needs_numba
@given(tables(total=True), tables(total=True))
def test_product_and_refine_parity(t1, t2):
    (a, acc), (b, _) = t1, t2
    if a.shape[1] != b.shape[1]:
        b = b[:, :1].repeat(a.shape[1], axis=1)
    p1, tab1 = _kernels.numba_impl.product(a, b, np.int64(0), np.int64(0))
    p2, tab2 = _kernels.numpy_impl.product(a, b, np.int64(0), np.int64(0))
    assert np.array_equal(p1, p2) and np.array_equal(tab1, tab2)
    assert same_partition(_kernels.numba_impl.refine(a, acc), _kernels.numpy_impl.refine(a, acc))


def test_refine_is_moore_partition():
    # states 0 and 1 are equivalent, 2 is not
    t = np.array([[1], [0], [2]], dtype=np.int32)
    acc = np.array([False, False, True])
    cls = _kernels.refine(t, acc)
    assert cls[0] == cls[1] != cls[2]


def test_env_flag_selects_numpy():
    code = "from cayleyauto import _kernels; print(_kernels.backend())"
    env = {**os.environ, "CAYLEYAUTO_NO_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_backend_end_to_end():
    code = (
        "from cayleyauto.representations import builtin, verify_rep\n"
        "from cayleyauto.automata import count_by_length\n"
        "r = verify_rep(builtin('binary-z'), 7)\n"
        "print(r.passed, count_by_length(builtin('heisenberg').language, 6))\n"
    )
    env = {**os.environ, "CAYLEYAUTO_NO_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "True [0, 0, 9, 58, 274, 1186, 4930]"
