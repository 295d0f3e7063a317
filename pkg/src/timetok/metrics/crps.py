"""Sample-based CRPS and its horizon sum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core._kernels import crps_pointwise
from ..core.series import DomainError


@dataclass(frozen=True)
class SampleFan:
    """K generated trajectories for one condition plus the ground truth."""

    samples: np.ndarray  # (K, T)
    truth: np.ndarray  # (T,)

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        truth = np.asarray(self.truth, dtype=np.float64)
        if samples.shape[0] < 1:
            raise DomainError("fan needs at least one sample")
        if samples.shape[1] != truth.shape[0]:
            raise DomainError(
                f"sample length {samples.shape[1]} != truth length {truth.shape[0]}"
            )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "truth", truth)


def crps_point(samples, truth: float) -> float:
    """CRPS estimate from K samples at one time step:
    mean |sample - truth| minus half the mean pairwise sample distance."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size == 0:
        raise DomainError("empty sample set")
    vals = crps_pointwise(
        np.ascontiguousarray(samples[:, None]), np.array([float(truth)])
    )
    return float(vals[0])


def crps_sum(fan: SampleFan) -> float:
    """Pointwise CRPS summed over the horizon."""
    return float(
        crps_pointwise(
            np.ascontiguousarray(fan.samples), np.ascontiguousarray(fan.truth)
        ).sum()
    )
