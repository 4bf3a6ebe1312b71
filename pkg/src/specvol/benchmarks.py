"""Benchmark the spectral coefficient kernel: numba vs pure numpy.

Run as `python -m specvol.benchmarks [--n N --blocks K --freqs J --reps R]`.
The kernel turns an increment vector of length n into the J x K coefficient
array; it dominates the Monte Carlo harness runtime.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels


def time_fn(fn, *args, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run(n: int, K: int, J: int, reps: int) -> None:
    geom = _kernels.block_geometry(n, K)
    scale = _kernels.coefficient_scales(n, K, J)
    dY = np.random.default_rng(0).standard_normal(n)

    t_numpy = time_fn(_kernels.block_sums_numpy, geom, dY, J, scale, reps=reps)
    print(f"n={n} K={K} J={J}  ({J * (n + 2 * K) / 1e6:.1f}M cos-diff terms per call)")
    print(f"  numpy : {t_numpy * 1e3:9.2f} ms")
    if _kernels.HAVE_NUMBA:
        _kernels.block_sums_numba(geom, dY, J, scale)  # JIT warm-up
        t_numba = time_fn(_kernels.block_sums_numba, geom, dY, J, scale, reps=reps)
        a = _kernels.block_sums_numpy(geom, dY, J, scale)
        b = _kernels.block_sums_numba(geom, dY, J, scale)
        rel = np.max(np.abs(a - b)) / np.max(np.abs(a))
        print(f"  numba : {t_numba * 1e3:9.2f} ms   speedup x{t_numpy / t_numba:.1f}   max rel diff {rel:.1e}")
    else:
        print("  numba : not installed")
    print(f"  active backend: {_kernels.active_backend()}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2 ** 16)
    parser.add_argument("--blocks", type=int, default=40)
    parser.add_argument("--freqs", type=int, default=192)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()
    run(args.n, args.blocks, args.freqs, args.reps)


if __name__ == "__main__":
    main()
