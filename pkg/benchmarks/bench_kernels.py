"""Compare the numba kernels against the pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--repeats 5]

Both paths are imported explicitly (bypassing the TIMETOK_DISABLE_NUMBA
dispatch) so one process can time them side by side. Numba timings exclude
the first call, which pays JIT compilation.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from timetok.core import _kernels as k


def _time(fn, args, repeats):
    fn(*args)  # warm up (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    try:
        from numba import njit
    except ImportError:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    x_long = rng.standard_normal(100_000)
    kern = np.exp(-np.arange(-36, 37) ** 2 / (2 * 12.0**2))
    kern /= kern.sum()
    sizes = np.array([4, 8, 16, 32, 64, 128, 256], dtype=np.int64)
    samples = rng.standard_normal((100, 512))
    truth = rng.standard_normal(512)

    cases = [
        ("convolve_renorm (T=100k, 73 taps)",
         k._convolve_renorm_loop, k._convolve_renorm_np, (x_long, kern)),
        ("dfa_fluctuations (T=100k, 7 sizes)",
         k._dfa_fluctuations_loop, k._dfa_fluctuations_np, (np.cumsum(x_long), sizes)),
        ("crps_pointwise (K=100, T=512)",
         k._crps_pointwise_loop, k._crps_pointwise_np, (samples, truth)),
        ("count_turning_points (T=100k)",
         k._count_turning_points_loop, k._count_turning_points_np, (x_long,)),
    ]

    print(f"{'kernel':<40} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, loop, np_fn, call_args in cases:
        jitted = njit(cache=True)(loop)
        t_nb = _time(jitted, call_args, args.repeats)
        t_np = _time(np_fn, call_args, args.repeats)
        print(f"{name:<40} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
