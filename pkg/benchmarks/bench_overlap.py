"""Benchmark the overlap-counting kernels.

Compares the compiled extension against the vectorized NumPy fallback and
the scalar reference on identical inputs, and checks that all three agree
bit for bit before timing anything.

Run as: python3 benchmarks/bench_overlap.py [n_points]
"""

import sys
import time

import numpy as np

from dispersive_lab.dyadic import (
    HAVE_COMPILED_KERNEL,
    FrequencyPoint,
    overlap_count,
    overlap_counts_bulk,
)


def sample_points(rng, n):
    xi = np.exp2(rng.uniform(-12.0, 12.0, n))
    dev = np.exp2(rng.uniform(-30.0, 30.0, n))
    tau = xi * xi * xi / 4.0 + dev
    return tau, xi


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    rng = np.random.default_rng(0)
    tau, xi = sample_points(rng, n)

    print(f"points per family: {n}")
    print(f"compiled kernel available: {HAVE_COMPILED_KERNEL}")

    for family in "AB":
        t_fb, counts_fb = time_call(
            lambda: overlap_counts_bulk(family, tau, xi, force_fallback=True)
        )
        line = f"family {family}: numpy fallback {t_fb * 1e3:8.1f} ms"
        if HAVE_COMPILED_KERNEL:
            t_cy, counts_cy = time_call(lambda: overlap_counts_bulk(family, tau, xi))
            if not np.array_equal(counts_fb, counts_cy):
                raise SystemExit(f"family {family}: kernel outputs disagree")
            line += f" | compiled {t_cy * 1e3:8.1f} ms | speedup {t_fb / t_cy:5.1f}x"
        print(line)

        m = min(n, 2_000)
        idx = rng.choice(n, m, replace=False)
        t0 = time.perf_counter()
        scalar = np.array(
            [int(overlap_count(family, FrequencyPoint(tau[i], xi[i]))) for i in idx]
        )
        t_sc = (time.perf_counter() - t0) * n / m
        if not np.array_equal(scalar, counts_fb[idx].sum(axis=1)):
            raise SystemExit(f"family {family}: scalar path disagrees")
        print(f"family {family}: scalar reference ~{t_sc * 1e3:8.1f} ms (extrapolated)")


if __name__ == "__main__":
    main()
