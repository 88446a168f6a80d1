"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--grid 1000] [--steps 200000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from thetafilter import _kernels_py, kernels

try:
    from thetafilter import _kernels as compiled
except ImportError:
    compiled = None

COEFFS = (1.5, -2.0, 0.5, 1.5, -1.0, 0.5)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    re = np.linspace(-10, 10, args.grid)
    zr, zi = (a.ravel() for a in np.meshgrid(re, re, indexing="ij"))
    threads = kernels.default_threads()
    t_eval = np.linspace(0.0, 1.0, args.steps + 1)
    g = 10.0 * np.sin(t_eval) + np.cos(t_eval)
    k = t_eval[1]

    rows = [("root modulus", "numpy", best_of(lambda: _kernels_py.max_root_modulus(COEFFS, zr, zi), args.repeat)),
            ("linear filter", "python", best_of(
                lambda: _kernels_py.linear_theta_filter(-10.0, g, 1.0, k, 1.0, 2 / 3), args.repeat))]
    if compiled is not None:
        rows.insert(1, ("root modulus", "cython x1", best_of(
            lambda: compiled.max_root_modulus(COEFFS, zr, zi, 1e-14, 1), args.repeat)))
        rows.insert(2, ("root modulus", f"cython x{threads}", best_of(
            lambda: compiled.max_root_modulus(COEFFS, zr, zi, 1e-14, threads), args.repeat)))
        rows.append(("linear filter", "cython", best_of(
            lambda: compiled.linear_theta_filter(-10.0, g, 1.0, k, 1.0, 2 / 3), args.repeat)))
    print(f"{'kernel':<14} {'backend':<12} {'seconds':>10}")
    for name, backend, secs in rows:
        print(f"{name:<14} {backend:<12} {secs:>10.4f}")
    print(f"(root modulus on {zr.size} points, linear filter with {args.steps} steps)")


if __name__ == "__main__":
    main()
