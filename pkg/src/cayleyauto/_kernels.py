"""Dense transition-table kernels.

Every kernel has two implementations with identical semantics: a numba
``@njit`` version and a pure-numpy version.  The active set is chosen once
at import time; set ``CAYLEYAUTO_NO_NUMBA=1`` to force the numpy path.

Tables are ``int32`` arrays of shape ``(n_states, n_symbols)``.  Unless a
kernel says otherwise, ``-1`` marks a missing transition.
"""

import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("CAYLEYAUTO_NO_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


class numpy_impl:
    """Vectorised fallbacks."""

    @staticmethod
    def run_words(table, start, words, lengths):
        n = words.shape[0]
        state = np.full(n, start, dtype=np.int32)
        if n == 0 or words.shape[1] == 0:
            return state
        for pos in range(words.shape[1]):
            live = (pos < lengths) & (state >= 0)
            if not live.any():
                break
            idx = np.nonzero(live)[0]
            state[idx] = table[state[idx], words[idx, pos]]
        return state

    @staticmethod
    def count_by_length(table, start, accepting, n):
        n_states = table.shape[0]
        out = np.zeros(n + 1, dtype=np.int64)
        if n_states == 0:
            return out
        src, sym = np.nonzero(table >= 0)
        dst = table[src, sym]
        vec = np.zeros(n_states, dtype=np.int64)
        vec[start] = 1
        out[0] = vec[accepting].sum()
        for k in range(1, n + 1):
            nxt = np.zeros(n_states, dtype=np.int64)
            np.add.at(nxt, dst, vec[src])
            vec = nxt
            out[k] = vec[accepting].sum()
        return out

    @staticmethod
    def live_steps(table, accepting, n):
        """live[j, q] is True iff some word of length exactly j leads q to accept."""
        n_states = table.shape[0]
        live = np.zeros((n + 1, n_states), dtype=np.bool_)
        live[0] = accepting
        padded = np.where(table >= 0, table, n_states)
        for j in range(1, n + 1):
            prev = np.append(live[j - 1], False)
            live[j] = prev[padded].any(axis=1)
        return live

    @staticmethod
    def product(t1, t2, s1, s2):
        """Reachable product of two total tables.

        Returns ``(pairs, table)``: ``pairs[i] = (q1, q2)`` for product state
        ``i`` and ``table`` over the same symbol columns.  State 0 is the
        start pair; the remaining numbering is deterministic.
        """
        n2 = t2.shape[0]
        m = t1.shape[1]
        seen = {}
        start = s1 * n2 + s2
        seen[start] = 0
        codes = [start]
        frontier = np.array([start], dtype=np.int64)
        rows = []
        while frontier.size:
            q1 = frontier // n2
            q2 = frontier % n2
            nxt = t1[q1].astype(np.int64) * n2 + t2[q2]
            flat = nxt.ravel()
            uniq, first = np.unique(flat, return_index=True)
            new = [c for c in uniq[np.argsort(first)] if c not in seen]
            for c in new:
                seen[c] = len(codes)
                codes.append(int(c))
            lookup = np.vectorize(seen.__getitem__, otypes=[np.int32])
            rows.append(lookup(nxt).reshape(-1, m))
            frontier = np.array(new, dtype=np.int64)
        table = np.concatenate(rows, axis=0) if rows else np.zeros((0, m), np.int32)
        codes = np.array(codes, dtype=np.int64)
        pairs = np.stack([codes // n2, codes % n2], axis=1)
        return pairs, table

    @staticmethod
    def refine(table, accepting):
        """Coarsest partition compatible with a total table (Moore)."""
        n_states, m = table.shape
        cls = accepting.astype(np.int64)
        _, cls = np.unique(cls, return_inverse=True)
        count = cls.max() + 1 if n_states else 0
        while True:
            sig = np.concatenate([cls[:, None], cls[table]], axis=1)
            _, new = np.unique(sig, axis=0, return_inverse=True)
            new = new.ravel()
            new_count = new.max() + 1 if n_states else 0
            if new_count == count:
                return new.astype(np.int32)
            cls, count = new, new_count

    @staticmethod
    def bfs_order(table, start):
        n_states, m = table.shape
        order = np.full(n_states, -1, dtype=np.int32)
        order[start] = 0
        queue = [start]
        head = 0
        nxt = 1
        while head < len(queue):
            q = queue[head]
            head += 1
            for r in table[q]:
                if r >= 0 and order[r] < 0:
                    order[r] = nxt
                    nxt += 1
                    queue.append(int(r))
        return order


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_run_words(table, start, words, lengths):
        n = words.shape[0]
        out = np.empty(n, dtype=np.int32)
        for i in range(n):
            q = start
            for pos in range(lengths[i]):
                q = table[q, words[i, pos]]
                if q < 0:
                    break
            out[i] = q
        return out

    @njit(cache=True)
    def _nb_count_by_length(table, start, accepting, n):
        n_states, m = table.shape
        out = np.zeros(n + 1, dtype=np.int64)
        if n_states == 0:
            return out
        vec = np.zeros(n_states, dtype=np.int64)
        vec[start] = 1
        total = 0
        for q in range(n_states):
            if accepting[q]:
                total += vec[q]
        out[0] = total
        for k in range(1, n + 1):
            nxt = np.zeros(n_states, dtype=np.int64)
            for q in range(n_states):
                v = vec[q]
                if v == 0:
                    continue
                for a in range(m):
                    r = table[q, a]
                    if r >= 0:
                        nxt[r] += v
            vec = nxt
            total = 0
            for q in range(n_states):
                if accepting[q]:
                    total += vec[q]
            out[k] = total
        return out

    @njit(cache=True)
    def _nb_live_steps(table, accepting, n):
        n_states, m = table.shape
        live = np.zeros((n + 1, n_states), dtype=np.bool_)
        for q in range(n_states):
            live[0, q] = accepting[q]
        for j in range(1, n + 1):
            for q in range(n_states):
                for a in range(m):
                    r = table[q, a]
                    if r >= 0 and live[j - 1, r]:
                        live[j, q] = True
                        break
        return live

    @njit(cache=True)
    def _nb_product(t1, t2, s1, s2):
        n1 = t1.shape[0]
        n2 = t2.shape[0]
        m = t1.shape[1]
        index = np.full(n1 * n2, -1, dtype=np.int64)
        codes = np.empty(n1 * n2, dtype=np.int64)
        start = s1 * n2 + s2
        index[start] = 0
        codes[0] = start
        count = 1
        table = np.empty((n1 * n2, m), dtype=np.int32)
        head = 0
        while head < count:
            c = codes[head]
            q1 = c // n2
            q2 = c % n2
            for a in range(m):
                d = np.int64(t1[q1, a]) * n2 + t2[q2, a]
                if index[d] < 0:
                    index[d] = count
                    codes[count] = d
                    count += 1
                table[head, a] = index[d]
            head += 1
        pairs = np.empty((count, 2), dtype=np.int64)
        for i in range(count):
            pairs[i, 0] = codes[i] // n2
            pairs[i, 1] = codes[i] % n2
        return pairs, table[:count].copy()

    @njit(cache=True)
    def _nb_relabel(keys):
        n = keys.shape[0]
        order = np.argsort(keys, kind="mergesort")
        out = np.empty(n, dtype=np.int64)
        label = -1
        prev = np.int64(0)
        for i in range(n):
            k = keys[order[i]]
            if i == 0 or k != prev:
                label += 1
                prev = k
            out[order[i]] = label
        return out, label + 1

    @njit(cache=True)
    def _nb_refine(table, accepting):
        n_states, m = table.shape
        keys = np.empty(n_states, dtype=np.int64)
        for q in range(n_states):
            keys[q] = 1 if accepting[q] else 0
        cls, count = _nb_relabel(keys)
        while True:
            before = count
            for a in range(m):
                for q in range(n_states):
                    keys[q] = cls[q] * (count + 1) + cls[table[q, a]]
                cls, count = _nb_relabel(keys)
            if count == before:
                break
        return cls.astype(np.int32)

    @njit(cache=True)
    def _nb_bfs_order(table, start):
        n_states, m = table.shape
        order = np.full(n_states, -1, dtype=np.int32)
        queue = np.empty(n_states, dtype=np.int32)
        order[start] = 0
        queue[0] = start
        count = 1
        head = 0
        while head < count:
            q = queue[head]
            head += 1
            for a in range(m):
                r = table[q, a]
                if r >= 0 and order[r] < 0:
                    order[r] = count
                    queue[count] = r
                    count += 1
        return order

    class numba_impl:
        """JIT-compiled kernels."""

        run_words = staticmethod(_nb_run_words)
        count_by_length = staticmethod(_nb_count_by_length)
        live_steps = staticmethod(_nb_live_steps)
        product = staticmethod(_nb_product)
        refine = staticmethod(_nb_refine)
        bfs_order = staticmethod(_nb_bfs_order)

else:  # pragma: no cover
    numba_impl = None


impl = numba_impl if USE_NUMBA else numpy_impl


def backend():
    return "numba" if impl is numba_impl else "numpy"


def run_words(table, start, words, lengths):
    return impl.run_words(table, np.int32(start), words, lengths)


def count_by_length(table, start, accepting, n):
    return impl.count_by_length(table, np.int32(start), accepting, int(n))


def live_steps(table, accepting, n):
    return impl.live_steps(table, accepting, int(n))


def product(t1, t2, s1, s2):
    return impl.product(t1, t2, np.int64(s1), np.int64(s2))


def refine(table, accepting):
    """Refinement classes of a *total* table (every entry a valid state)."""
    if table.shape[0] == 0:
        return np.zeros(0, dtype=np.int32)
    return impl.refine(table, accepting)


def bfs_order(table, start):
    return impl.bfs_order(table, np.int32(start))
