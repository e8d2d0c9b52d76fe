"""Compare the compiled and numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from listsecrecy import _core_py, kernels
from listsecrecy.prob import all_sequences

try:
    from listsecrecy import _core
except ImportError:  # extension not built
    _core = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases():
    rng = np.random.default_rng(0)
    p = np.array([0.7, 0.3])
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = np.exp(-2.0 * d)
    q0 = np.full(2, 0.5)
    p5 = rng.dirichlet(np.ones(5))
    d5 = rng.uniform(0, 1, (5, 5))
    np.fill_diagonal(d5, 0)
    A5 = np.exp(-3.0 * d5)
    xs = all_sequences(12, 2)
    ys = xs[rng.choice(xs.shape[0], 1024, replace=False)]
    cover = kernels.cover_matrix(xs, ys, d, 3)
    w = rng.random(ys.shape[0])
    return {
        "ba binary (slow knee)": lambda impl: kernels.ba_solve(p, np.exp(-0.85 * d), d, q0, 10000, 1e-10, impl),
        "ba binary": lambda impl: kernels.ba_solve(p, A, d, q0, 10000, 1e-10, impl),
        "ba 5x5": lambda impl: kernels.ba_solve(p5, A5, d5, np.full(5, 0.2), 10000, 1e-10, impl),
        "pairwise 4096x1024 n=12": lambda impl: kernels.pairwise_sum(xs, ys, d, impl),
        "cover 4096x1024 n=12": lambda impl: kernels.cover_matrix(xs, ys, d, 3, impl),
        "greedy 4096x1024 budget 64": lambda impl: kernels.greedy_max_cover(cover, w, 64, impl),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<30}{'numpy (ms)':>12}{'compiled (ms)':>15}{'speedup':>10}")
    for name, fn in cases().items():
        tp = timeit(lambda: fn(_core_py), args.repeat) * 1e3
        if _core is None:
            print(f"{name:<30}{tp:>12.3f}{'n/a':>15}{'':>10}")
            continue
        tc = timeit(lambda: fn(_core), args.repeat) * 1e3
        print(f"{name:<30}{tp:>12.3f}{tc:>15.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
