"""Timing of the numba kernels against their pure-numpy counterparts.

Both paths are exercised in one process through the ``method`` argument,
which is what ``DIRINFO_DISABLE_NUMBA=1`` switches globally. Every row
also checks that the two paths agree exactly.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 1000 4000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from dirinfo import neighbors
from dirinfo.gaussian_oracle import _recursion_numpy, ring_model
from dirinfo._kernels_numba import var_recursion


def best_of(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(u, v) for u, v in zip(a, b))
    return np.array_equal(a, b)


def cases(n, rng):
    pts = rng.standard_normal((n, 6))
    eps = neighbors.knn_radius(pts, 4, method="brute")
    fixed = rng.standard_normal((n, 6))
    index = {m: neighbors.FixedBlockIndex(fixed, m=min(256, n - 1), method=m)
             for m in ("tree", "brute")}
    x, y, zr = rng.standard_normal((n, 3)), rng.standard_normal((n, 1)), np.empty((n, 0))
    model = ring_model()
    noise = rng.standard_normal((n, 3))
    init = np.zeros((1, 3))
    return [
        ("knn_radius d=6 k=4",
         lambda m: neighbors.knn_radius(pts, 4, method=m)),
        ("range_count d=6",
         lambda m: neighbors.range_count(pts, eps, method=m)),
        ("knn_lists d=6 m=256",
         lambda m: neighbors.knn_lists(fixed, min(256, n - 1), method=m)[1]),
        ("cmi_counts (reused lists)",
         lambda m: index[m].cmi_counts(x, y, zr, 4)),
        ("var_recursion M=3",
         lambda m: (var_recursion if m == "tree" else _recursion_numpy)(model.coeffs, noise, init)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'n':>6s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  equal")
    for n in args.sizes:
        for name, fn in cases(n, rng):
            fn("tree")  # compile outside the timed region
            t_nb, out_nb = best_of(lambda: fn("tree"), args.repeat)
            t_np, out_np = best_of(lambda: fn("brute"), args.repeat)
            print(f"{name:28s} {n:6d} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}  {same(out_nb, out_np)}")


if __name__ == "__main__":
    main()
