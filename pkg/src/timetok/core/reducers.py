"""Information-reducing operators over granularity levels.

The training-time operator is Gaussian smoothing with a level-dependent
bandwidth; moving-average, downsample and wavelet variants exist for
evaluation-time comparisons only.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from ._kernels import convolve_renorm
from .schedule import GranularitySchedule
from .series import DomainError, as_values, like


class ReducerKind(str, Enum):
    GAUSSIAN = "gaussian"
    MOVING_AVERAGE = "moving_average"
    DOWNSAMPLE = "downsample"
    WAVELET = "wavelet"


class UnsupportedOperatorError(DomainError):
    """Operation only defined for the Gaussian reducer family."""


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Discrete normalized Gaussian, truncated to |i| <= 3*sigma.

    sigma = 0 degenerates to the single-tap identity kernel.
    """
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    radius = int(math.floor(3.0 * sigma))
    if sigma == 0.0 or radius == 0:
        return np.ones(1, dtype=np.float64)
    i = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(i**2) / (2.0 * sigma**2))
    return w / w.sum()


def smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian smoothing with boundary-truncated, renormalized taps."""
    w = gaussian_kernel(sigma)
    if w.shape[0] == 1:
        return np.asarray(values, dtype=np.float64).copy()
    return convolve_renorm(np.ascontiguousarray(values, dtype=np.float64), w)


def _moving_average(values: np.ndarray, sigma: float) -> np.ndarray:
    # window sized to the matching Gaussian support
    win = 2 * int(math.floor(3.0 * sigma)) + 1
    if win <= 1:
        return values.copy()
    w = np.ones(win, dtype=np.float64) / win
    return convolve_renorm(np.ascontiguousarray(values, dtype=np.float64), w)


def _downsample(values: np.ndarray, level: int, n_levels: int) -> np.ndarray:
    factor = 2 ** (n_levels - level)
    if factor <= 1:
        return values.copy()
    t_len = values.shape[0]
    coarse = values[::factor]
    if coarse.shape[0] < 2:
        coarse = np.array([values[0], values[-1]])
    xp = np.arange(coarse.shape[0]) * factor
    return np.interp(np.arange(t_len), xp, coarse)


def _wavelet(values: np.ndarray, level: int, n_levels: int) -> np.ndarray:
    # Daubechies-4 analysis/synthesis; keep the `level` coarsest bands.
    c = math.sqrt(2.0)
    h = np.array([1 + math.sqrt(3), 3 + math.sqrt(3), 3 - math.sqrt(3), 1 - math.sqrt(3)])
    h = h / (4.0 / c)
    g = h[::-1].copy()
    g[1::2] *= -1

    t_len = values.shape[0]
    depth = n_levels - level
    max_depth = max(int(math.log2(t_len)) - 2, 0)
    depth = min(depth, max_depth)
    if depth == 0:
        return values.copy()

    def analyze(a):
        n = a.shape[0]
        ext = np.concatenate([a, a[:2]])  # periodic extension
        lo = np.array([np.dot(h, ext[2 * k : 2 * k + 4]) for k in range(n // 2)])
        hi = np.array([np.dot(g, ext[2 * k : 2 * k + 4]) for k in range(n // 2)])
        return lo, hi

    def synthesize(lo, hi):
        n = 2 * lo.shape[0]
        out = np.zeros(n + 2)
        for k in range(lo.shape[0]):
            out[2 * k : 2 * k + 4] += h * lo[k] + g * hi[k]
        out[:2] += out[n : n + 2]
        return out[:n]

    pad = (-t_len) % (2**depth)
    a = np.concatenate([values, values[-1] * np.ones(pad)]) if pad else values.copy()
    details = []
    for _ in range(depth):
        a, d = analyze(a)
        details.append(np.zeros_like(d))  # drop the fine bands
    for d in reversed(details):
        a = synthesize(a, d)
    return a[:t_len]


def reduce(x, level: int, schedule: GranularitySchedule, kind: ReducerKind = ReducerKind.GAUSSIAN):
    """Map a raw series to its level-`level` representation.

    All kinds return a series of the input's length; the finest level is the
    identity for every kind.
    """
    values = as_values(x)
    if not 1 <= level <= schedule.n_levels:
        raise DomainError(f"level {level} outside [1, {schedule.n_levels}]")
    kind = ReducerKind(kind)
    if level == schedule.n_levels:
        return like(x, values.copy())
    sigma = level_sigma_of(schedule, level, values.shape[0])
    if kind is ReducerKind.GAUSSIAN:
        out = smooth(values, sigma)
    elif kind is ReducerKind.MOVING_AVERAGE:
        out = _moving_average(values, sigma)
    elif kind is ReducerKind.DOWNSAMPLE:
        out = _downsample(values, level, schedule.n_levels)
    elif kind is ReducerKind.WAVELET:
        out = _wavelet(values, level, schedule.n_levels)
    else:  # pragma: no cover
        raise DomainError(f"unknown reducer kind {kind!r}")
    return like(x, out)


def level_sigma_of(schedule: GranularitySchedule, level: int, t_len: int) -> float:
    """Schedule bandwidth, falling back to the actual series length when the
    schedule was built for a different T."""
    if schedule.series_length == t_len or schedule.sigma_max is not None:
        return schedule.sigma(level)
    from .schedule import level_sigma

    return level_sigma(level, t_len, schedule.n_levels, None)


def recoarsen(x_fine, i: int, j: int, schedule: GranularitySchedule):
    """Map a level-j series down to level i (i <= j).

    Gaussians compose: the extra bandwidth is sqrt(sigma_i^2 - sigma_j^2).
    Only defined for the Gaussian reducer family.
    """
    values = as_values(x_fine)
    if not 1 <= i <= schedule.n_levels or not 1 <= j <= schedule.n_levels:
        raise DomainError(f"levels ({i}, {j}) outside [1, {schedule.n_levels}]")
    if i > j:
        raise DomainError(f"recoarsen needs i <= j, got i={i}, j={j}")
    if i == j:
        return like(x_fine, values.copy())
    s_i = level_sigma_of(schedule, i, values.shape[0])
    s_j = level_sigma_of(schedule, j, values.shape[0])
    sigma = math.sqrt(max(s_i**2 - s_j**2, 0.0))
    return like(x_fine, smooth(values, sigma))
