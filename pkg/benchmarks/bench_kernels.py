"""Throughput comparison of the two kernel backends.

Runs the panel quadrature kernel and the Weierstrass oscillation scan on
representative workloads under the compiled (numba) and vectorized
(numpy) implementations, and prints nodes/points per second for each.
The first numba call includes JIT compilation and is excluded by a
warmup round.

Usage: python benchmarks/bench_kernels.py [--panels N] [--points N]
       [--repeats R]
"""

import argparse
import time

import numpy as np

from qmoments import _kernels


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_panels(n_panels, repeats):
    nodes, weights = np.polynomial.legendre.leggauss(32)
    centers = np.linspace(-5.0, 5.0, n_panels)
    phase0 = np.random.default_rng(1).uniform(0.0, 2.0 * np.pi, n_panels)
    args = (centers, 5.0 / n_panels, nodes, weights, 1.0, 0.0, 0.0, phase0, 40.0, 2)
    work = n_panels * 32
    rows = []
    variants = [("numpy", _kernels._gauss_panels_numpy)]
    if _kernels.USE_NUMBA:
        variants.insert(0, ("numba", _kernels.gauss_panels))
    for name, fn in variants:
        fn(*args)
        dt = best_time(lambda: fn(*args), repeats)
        rows.append((f"gauss_panels/{name}", work, dt))
    return rows


def bench_weier(n_points, repeats):
    u = np.random.default_rng(2).uniform(0.0, 1.0, n_points)
    terms = 21
    work = n_points * terms
    rows = []
    variants = [("numpy", _kernels._weier_sum_u_numpy)]
    if _kernels.USE_NUMBA:
        variants.insert(0, ("numba", _kernels.weier_sum_u))
    for name, fn in variants:
        fn(u, 0.5, 3.0, terms, 1)
        dt = best_time(lambda: fn(u, 0.5, 3.0, terms, 1), repeats)
        rows.append((f"weier_sum_u/{name}", work, dt))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--panels", type=int, default=20_000)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    ns = ap.parse_args()

    print(f"active backend: {_kernels.backend_name()}")
    rows = bench_panels(ns.panels, ns.repeats) + bench_weier(ns.points, ns.repeats)
    width = max(len(r[0]) for r in rows)
    for name, work, dt in rows:
        print(f"{name:<{width}}  {dt * 1e3:8.2f} ms  {work / dt / 1e6:9.1f} Mops/s")
    pairs = {}
    for name, work, dt in rows:
        kernel, backend = name.split("/")
        pairs.setdefault(kernel, {})[backend] = dt
    for kernel, times in pairs.items():
        if "numba" in times and "numpy" in times:
            print(f"{kernel}: numba is {times['numpy'] / times['numba']:.2f}x numpy")


if __name__ == "__main__":
    main()
