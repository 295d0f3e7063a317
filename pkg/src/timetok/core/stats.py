"""Signal roughness statistics."""

from __future__ import annotations

import numpy as np

from ._kernels import count_turning_points
from .series import DomainError, as_values


def turning_point_rate(x) -> float:
    """Fraction of interior points that are strict local extrema."""
    values = as_values(x)
    if values.shape[0] < 3:
        raise DomainError("need at least 3 points for turning points")
    return count_turning_points(np.ascontiguousarray(values, dtype=np.float64)) / (
        values.shape[0] - 2
    )
