"""
Compare the compiled and pure-Python Cayley propagation kernels.

    python3 benchmarks/bench_kernels.py [--steps 1000] [--repeat 5]

Prints wall time per backend for a few Hilbert-space sizes and the largest
difference between the two propagators.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from oscgate._backend import compiled_kernels, python_kernels


def random_hamiltonians(steps: int, d: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((steps, d, d)) + 1j * rng.standard_normal((steps, d, d))
    return 0.5 * (X + np.conj(np.swapaxes(X, 1, 2)))


def best_of(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--dims", type=int, nargs="+", default=[2, 8, 27, 64])
    args = p.parse_args(argv)
    if compiled_kernels is None:
        print("compiled kernel not built; only the Python fallback is available")
    print(f"{'d':>4} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8} {'max |dU|':>10}")
    for d in args.dims:
        H = random_hamiltonians(args.steps, d)
        dt = 1.0 / args.steps
        tp = best_of(lambda: python_kernels.cayley_product(H, dt, True), args.repeat)
        Up, _ = python_kernels.cayley_product(H, dt, True)
        if compiled_kernels is None:
            print(f"{d:>4} {tp:>12.4f} {'-':>12} {'-':>8} {'-':>10}")
            continue
        tc = best_of(lambda: compiled_kernels.cayley_product(H, dt, True), args.repeat)
        Uc, _ = compiled_kernels.cayley_product(H, dt, True)
        diff = float(np.max(np.abs(np.asarray(Uc) - Up)))
        print(f"{d:>4} {tp:>12.4f} {tc:>12.4f} {tp / tc:>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
