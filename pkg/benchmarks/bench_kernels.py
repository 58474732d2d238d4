"""Time the numba kernels against the numpy fallbacks on random tables.

    python3 benchmarks/bench_kernels.py [--states 4000] [--symbols 8] [--repeat 3]

Each kernel is run once per backend to warm up (numba compiles on the
first call), then timed as the best of ``--repeat`` runs.  Outputs are
checked for agreement before any timing is printed.
"""

import argparse
import time

import numpy as np

from cayleyauto import _kernels


def random_table(rng, n, m, total):
    t = rng.integers(0, n, size=(n, m), dtype=np.int32)
    if not total:
        t[rng.random((n, m)) < 0.2] = -1
    return t


def same_partition(a, b):
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def cases(rng, n, m):
    partial = random_table(rng, n, m, total=False)
    total = random_table(rng, n, m, total=True)
    small = random_table(rng, max(n // 40, 2), m, total=True)
    acc = rng.random(n) < 0.3
    words = rng.integers(0, m, size=(20_000, 24), dtype=np.int32)
    lengths = rng.integers(0, 25, size=20_000).astype(np.int64)
    return {
        "run_words": ((partial, np.int32(0), words, lengths), np.array_equal),
        "count_by_length": ((partial, np.int32(0), acc, 40), np.array_equal),
        "live_steps": ((partial, acc, 40), np.array_equal),
        "product": ((small, small[::-1].copy(), np.int64(0), np.int64(1)),
                    lambda x, y: all(np.array_equal(p, q) for p, q in zip(x, y))),
        "refine": ((total, acc), same_partition),
        "bfs_order": ((partial, np.int32(0)), np.array_equal),
    }


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=4000)
    ap.add_argument("--symbols", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for name, (inputs, agree) in cases(rng, args.states, args.symbols).items():
        fast = getattr(_kernels.numba_impl, name)
        slow = getattr(_kernels.numpy_impl, name)
        if not agree(fast(*inputs), slow(*inputs)):
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(slow, inputs, args.repeat)
        t_nb = best_of(fast, inputs, args.repeat)
        print(f"{name:<16}{t_np:>12.4f}{t_nb:>12.4f}{t_np / max(t_nb, 1e-9):>9.1f}x")


if __name__ == "__main__":
    main()
