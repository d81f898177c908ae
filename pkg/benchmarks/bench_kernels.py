#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on growing problem sizes with both implementations and
prints a timing table. The numba path includes a warm-up call so JIT
compilation is not counted.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5] [--quick]
"""

import argparse
import time

import numpy as np

from latentphase import _kernels


def _best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_omega_rows(sizes, repeats):
    rng = np.random.default_rng(0)
    rows = []
    for T, d in sizes:
        X = rng.standard_normal((T, d))
        np_fn = _kernels.get_impl("omega_rows", "numpy")
        nb_fn = _kernels.get_impl("omega_rows", "numba")
        nb_fn(X[:2])  # warm up the JIT
        t_np = _best_of(np_fn, (X,), repeats)
        t_nb = _best_of(nb_fn, (X,), repeats)
        rows.append((f"omega_rows {T}x{d}", t_np, t_nb))
    return rows


def bench_collapse_objective(sizes, repeats):
    rng = np.random.default_rng(1)
    rows = []
    for n in sizes:
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        np_fn = _kernels.get_impl("collapse_objective", "numpy")
        nb_fn = _kernels.get_impl("collapse_objective", "numba")
        nb_fn(x[:50], y[:50], 20)  # warm up the JIT
        t_np = _best_of(np_fn, (x, y, 20), repeats)
        t_nb = _best_of(nb_fn, (x, y, 20), repeats)
        rows.append((f"collapse_objective n={n}", t_np, t_nb))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--quick", action="store_true",
                    help="smaller sizes for a fast smoke run")
    args = ap.parse_args()

    if args.quick:
        omega_sizes = [(1_000, 64), (10_000, 256)]
        collapse_sizes = [1_000, 100_000]
    else:
        omega_sizes = [(1_000, 64), (10_000, 256), (50_000, 1024)]
        collapse_sizes = [1_000, 100_000, 2_000_000]

    rows = bench_omega_rows(omega_sizes, args.repeats)
    rows += bench_collapse_objective(collapse_sizes, args.repeats)

    name_w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{name_w}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, t_np, t_nb in rows:
        print(f"{name:<{name_w}}  {t_np * 1e3:>8.3f}ms  {t_nb * 1e3:>8.3f}ms  "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
