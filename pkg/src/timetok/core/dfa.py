"""Detrended fluctuation analysis and DFA-based level assignment."""

from __future__ import annotations

import math

import numpy as np

from ._kernels import dfa_fluctuations
from .series import DomainError, as_values


def default_window_sizes(t_len: int, n_sizes: int = 12) -> np.ndarray:
    """Log-spaced window sizes from 4 to T/4."""
    lo, hi = 4, max(t_len // 4, 5)
    sizes = np.unique(np.round(np.geomspace(lo, hi, n_sizes)).astype(int))
    return sizes[sizes >= 4]


def dfa_exponent(x, window_sizes=None) -> float:
    """DFA-1 scaling exponent: slope of log F(n) against log n.

    Uses the cumulative-sum profile, order-1 polynomial detrending per
    window, and non-overlapping windows swept from both ends.
    """
    values = as_values(x)
    t_len = values.shape[0]
    if window_sizes is None:
        window_sizes = default_window_sizes(t_len)
    sizes = np.unique(np.asarray(window_sizes, dtype=np.int64))
    if sizes.shape[0] < 4:
        raise DomainError("need at least 4 distinct window sizes")
    if np.any(sizes < 4):
        raise DomainError("window sizes must be >= 4")
    if t_len < 4 * int(sizes.min()):
        raise DomainError(f"series of length {t_len} too short for DFA")
    profile = np.cumsum(values - values.mean())
    fluct = dfa_fluctuations(np.ascontiguousarray(profile), sizes)
    mask = fluct > 0
    if mask.sum() < 2:
        raise DomainError("degenerate fluctuation function (constant series?)")
    slope, _ = np.polyfit(np.log(sizes[mask].astype(float)), np.log(fluct[mask]), 1)
    return float(slope)


def assign_level_dfa(
    alpha: float,
    alpha_min: float = 0.5,
    alpha_max: float = 1.5,
    n_levels: int = 8,
    orientation: str = "ascending",
) -> int:
    """Uniformly bin a DFA exponent into a granularity level.

    ``ascending`` maps alpha_min -> level 1 and alpha_max -> level L;
    ``descending`` flips the orientation (rougher series -> finer level).
    """
    if not alpha_min < alpha_max:
        raise DomainError("alpha_min must be < alpha_max")
    if n_levels < 2:
        raise DomainError("need at least 2 levels")
    a = min(max(alpha, alpha_min), alpha_max)
    level = 1 + math.floor(n_levels * (a - alpha_min) / (alpha_max - alpha_min))
    level = min(max(level, 1), n_levels)
    if orientation == "descending":
        level = n_levels + 1 - level
    elif orientation != "ascending":
        raise DomainError(f"unknown orientation {orientation!r}")
    return level
