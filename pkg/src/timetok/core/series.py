"""Raw series containers and z-normalization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


class DomainError(ValueError):
    """Argument outside an operation's documented domain."""


@dataclass(frozen=True)
class NormalizationStats:
    mean: float
    std: float

    def __post_init__(self):
        if not (self.std > 0):
            raise DomainError(f"std must be positive, got {self.std}")

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return values * self.std + self.mean

    @classmethod
    def from_values(cls, values: np.ndarray) -> "NormalizationStats":
        std = float(np.std(values))
        if std == 0.0:
            std = 1.0
        return cls(mean=float(np.mean(values)), std=std)


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    class_label: Optional[int] = None
    norm: Optional[NormalizationStats] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DomainError(f"series must be 1-D, got shape {values.shape}")
        if values.shape[0] < 2:
            raise DomainError("series must have at least 2 points")
        if not np.all(np.isfinite(values)):
            raise DomainError("series contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        return replace(self, values=values)

    def denormalized(self) -> "TimeSeries":
        if self.norm is None:
            return self
        return replace(self, values=self.norm.denormalize(self.values), norm=None)


def as_values(x) -> np.ndarray:
    """Accept a TimeSeries or a plain 1-D array."""
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=np.float64)


def like(x, values: np.ndarray):
    """Return ``values`` wrapped the same way ``x`` was."""
    if isinstance(x, TimeSeries):
        return x.with_values(values)
    return values
