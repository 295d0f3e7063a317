"""Hot numeric inner loops.

Every kernel ships in two variants: a numba ``@njit`` version and a pure-numpy
fallback. Set ``TIMETOK_DISABLE_NUMBA=1`` to force the fallback path (useful
for debugging and for the benchmark in ``benchmarks/``). The two paths are
checked against each other in ``tests/test_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("TIMETOK_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = [
    "USE_NUMBA",
    "convolve_renorm",
    "dfa_fluctuations",
    "crps_pointwise",
    "count_turning_points",
]


# ---------------------------------------------------------------------------
# edge-renormalized "same" convolution


def _convolve_renorm_np(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    # truncate the kernel at the boundary and renormalize the surviving taps
    # ('full' then centred slice: mode='same' misbehaves when the kernel is
    # longer than the series)
    r = w.shape[0] // 2
    num = np.convolve(x, w, mode="full")[r : r + x.shape[0]]
    den = np.convolve(np.ones_like(x), w, mode="full")[r : r + x.shape[0]]
    return num / den


def _convolve_renorm_loop(x, w):
    t_len = x.shape[0]
    r = w.shape[0] // 2
    out = np.empty(t_len, dtype=np.float64)
    for t in range(t_len):
        acc = 0.0
        norm = 0.0
        lo = -r if t - r >= 0 else -t
        hi = r if t + r < t_len else t_len - 1 - t
        for i in range(lo, hi + 1):
            wi = w[i + r]
            acc += wi * x[t + i]
            norm += wi
        out[t] = acc / norm
    return out


# ---------------------------------------------------------------------------
# DFA fluctuation function (order-1 detrending, non-overlapping windows,
# forward and backward passes)


def _dfa_fluctuations_np(profile: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    n_total = profile.shape[0]
    out = np.empty(len(sizes), dtype=np.float64)
    for k, n in enumerate(sizes):
        n_win = n_total // n
        segs_f = profile[: n_win * n].reshape(n_win, n)
        segs_b = profile[n_total - n_win * n :].reshape(n_win, n)
        t = np.arange(n, dtype=np.float64)
        a = np.vstack([t, np.ones(n)]).T
        sq = 0.0
        for segs in (segs_f, segs_b):
            coef, *_ = np.linalg.lstsq(a, segs.T, rcond=None)
            resid = segs.T - a @ coef
            sq += np.mean(resid**2)
        out[k] = np.sqrt(sq / 2.0)
    return out


def _dfa_fluctuations_loop(profile, sizes):
    n_total = profile.shape[0]
    out = np.empty(sizes.shape[0], dtype=np.float64)
    for k in range(sizes.shape[0]):
        n = sizes[k]
        n_win = n_total // n
        # closed-form order-1 least squares per window, both directions
        sx = 0.0
        sxx = 0.0
        for t in range(n):
            sx += t
            sxx += t * t
        det = n * sxx - sx * sx
        total = 0.0
        for direction in range(2):
            for w_idx in range(n_win):
                start = w_idx * n if direction == 0 else (n_total - n_win * n) + w_idx * n
                sy = 0.0
                sxy = 0.0
                for t in range(n):
                    y = profile[start + t]
                    sy += y
                    sxy += t * y
                slope = (n * sxy - sx * sy) / det
                icept = (sy - slope * sx) / n
                acc = 0.0
                for t in range(n):
                    d = profile[start + t] - (slope * t + icept)
                    acc += d * d
                total += acc / n
        out[k] = np.sqrt(total / (2.0 * n_win))
    return out


# ---------------------------------------------------------------------------
# CRPS sample estimator, evaluated at every time step of a fan


def _crps_pointwise_np(samples: np.ndarray, truth: np.ndarray) -> np.ndarray:
    # samples: (K, T), truth: (T,)
    term1 = np.mean(np.abs(samples - truth[None, :]), axis=0)
    term2 = np.mean(
        np.abs(samples[:, None, :] - samples[None, :, :]), axis=(0, 1)
    )
    return term1 - 0.5 * term2


def _crps_pointwise_loop(samples, truth):
    k_n, t_len = samples.shape
    out = np.empty(t_len, dtype=np.float64)
    for t in range(t_len):
        acc1 = 0.0
        for k in range(k_n):
            acc1 += abs(samples[k, t] - truth[t])
        acc2 = 0.0
        for k in range(k_n):
            for k2 in range(k_n):
                acc2 += abs(samples[k, t] - samples[k2, t])
        out[t] = acc1 / k_n - acc2 / (2.0 * k_n * k_n)
    return out


# ---------------------------------------------------------------------------
# strict interior turning points


def _count_turning_points_np(x: np.ndarray) -> int:
    left = x[1:-1] - x[:-2]
    right = x[1:-1] - x[2:]
    return int(np.sum((left > 0) & (right > 0)) + np.sum((left < 0) & (right < 0)))


def _count_turning_points_loop(x):
    cnt = 0
    for t in range(1, x.shape[0] - 1):
        if (x[t] > x[t - 1] and x[t] > x[t + 1]) or (x[t] < x[t - 1] and x[t] < x[t + 1]):
            cnt += 1
    return cnt


if USE_NUMBA:
    convolve_renorm = njit(cache=True)(_convolve_renorm_loop)
    dfa_fluctuations = njit(cache=True)(_dfa_fluctuations_loop)
    crps_pointwise = njit(cache=True)(_crps_pointwise_loop)
    count_turning_points = njit(cache=True)(_count_turning_points_loop)
else:
    convolve_renorm = _convolve_renorm_np
    dfa_fluctuations = _dfa_fluctuations_np
    crps_pointwise = _crps_pointwise_np
    count_turning_points = _count_turning_points_np
