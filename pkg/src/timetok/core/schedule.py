"""Granularity schedules: per-level token budgets and smoothing bandwidths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .series import DomainError

Allocation = Literal["pow2", "equal-bin"]


def level_sigma(level: int, t_len: int, n_levels: int, sigma_max: float | None = None) -> float:
    """Smoothing bandwidth for a granularity level.

    sigma(level) = sigma_max * (L - level) / (L - 1), with sigma_max = T/12
    unless overridden. The finest level gets sigma 0 (identity).
    """
    if not 1 <= level <= n_levels:
        raise DomainError(f"level {level} outside [1, {n_levels}]")
    if t_len < 2:
        raise DomainError("series length must be >= 2")
    if n_levels < 2:
        raise DomainError("need at least 2 levels")
    s_max = t_len / 12.0 if sigma_max is None else float(sigma_max)
    return s_max * (n_levels - level) / (n_levels - 1)


def tokens_for_level(level: int, scheme: Allocation, total: int, n_levels: int = 8) -> int:
    """Token budget n_level under the chosen allocation scheme.

    pow2: 1, 2, 4, ... doubling up to the total budget at the finest level.
    equal-bin: (total / L) * level, i.e. a uniform allocation.
    """
    if not 1 <= level <= n_levels:
        raise DomainError(f"level {level} outside [1, {n_levels}]")
    if scheme == "pow2":
        n = 2 ** (level - 1)
    elif scheme == "equal-bin":
        if total % n_levels != 0:
            raise DomainError(f"equal-bin needs total {total} divisible by L={n_levels}")
        n = (total // n_levels) * level
    else:
        raise DomainError(f"unknown allocation scheme {scheme!r}")
    if n > total:
        raise DomainError(f"budget n_{level}={n} exceeds total {total}")
    return n


@dataclass(frozen=True)
class GranularitySchedule:
    n_levels: int = 8
    total_tokens: int = 128
    allocation: Allocation = "pow2"
    series_length: int = 128
    sigma_max: float | None = None  # None -> series_length / 12

    def __post_init__(self):
        if self.n_levels < 2:
            raise DomainError("need at least 2 levels")
        budgets = self.budgets
        if budgets[-1] != self.total_tokens:
            raise DomainError(
                f"finest-level budget {budgets[-1]} != total {self.total_tokens}"
            )
        for a, b in zip(budgets, budgets[1:]):
            if b <= a:
                raise DomainError("budgets must be strictly increasing")

    @property
    def budgets(self) -> tuple[int, ...]:
        return tuple(
            tokens_for_level(l, self.allocation, self.total_tokens, self.n_levels)
            for l in range(1, self.n_levels + 1)
        )

    @property
    def sigmas(self) -> tuple[float, ...]:
        return tuple(self.sigma(l) for l in range(1, self.n_levels + 1))

    def sigma(self, level: int) -> float:
        return level_sigma(level, self.series_length, self.n_levels, self.sigma_max)

    def tokens(self, level: int) -> int:
        return tokens_for_level(level, self.allocation, self.total_tokens, self.n_levels)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        budgets = (0,) + self.budgets
        return tuple(b - a for a, b in zip(budgets, budgets[1:]))

    def to_dict(self) -> dict:
        return {
            "n_levels": self.n_levels,
            "total_tokens": self.total_tokens,
            "allocation": self.allocation,
            "series_length": self.series_length,
            "sigma_max": self.sigma_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GranularitySchedule":
        return cls(**d)
