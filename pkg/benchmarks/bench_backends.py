"""Timing comparison of the kernel backends.

Runs the two hot kernels (tridiagonal solve, explicit planar log step)
through every available backend and prints per-call timings plus the
speedup of each backend over the pure-Python reference.

Usage:
    python3 benchmarks/bench_backends.py [--n 2000] [--nx 201] [--repeats 200]
"""

import argparse
import time

import numpy as np

from logdiff import kernels


def bench(fn, args, repeats):
    # one warmup call, then best-of-3 batches
    fn(*args)
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def tridiag_case(n, rng):
    diag = 2.5 + rng.random(n)
    sub = -rng.random(n - 1)
    sup = -rng.random(n - 1)
    rhs = rng.standard_normal(n)
    return sub, diag, sup, rhs


def planar_case(nx, rng):
    v = np.exp(rng.standard_normal((nx, nx)) * 0.1)
    out = np.empty_like(v)
    return v, out, 1e-4


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="tridiagonal system size")
    ap.add_argument("--nx", type=int, default=201, help="planar grid edge")
    ap.add_argument("--repeats", type=int, default=200, help="calls per timing batch")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        ("tridiag_solve", f"n={args.n}", tridiag_case(args.n, rng)),
        ("planar_log_step", f"{args.nx}x{args.nx}", planar_case(args.nx, rng)),
    ]

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.active_backend()})")
    print()
    print(f"{'kernel':<18} {'size':<10} " + " ".join(f"{b:>12}" for b in backends) + "  speedup")
    for name, size, case_args in cases:
        times = {}
        for backend in backends:
            fn = getattr(kernels.implementation(backend), name)
            times[backend] = bench(fn, case_args, args.repeats)
        cells = " ".join(f"{times[b] * 1e6:>10.1f}us" for b in backends)
        if "cython" in times and "python" in times:
            speedup = f"{times['python'] / times['cython']:.2f}x"
        else:
            speedup = "n/a"
        print(f"{name:<18} {size:<10} {cells}  {speedup}")


if __name__ == "__main__":
    main()
