"""Coarse consistency: RMSE after mapping a generation back to the
condition's granularity level."""

from __future__ import annotations

import numpy as np

from ..core.reducers import ReducerKind, UnsupportedOperatorError, recoarsen
from ..core.schedule import GranularitySchedule
from ..core.series import as_values


def c_cons(
    generated,
    condition,
    i: int,
    j: int,
    schedule: GranularitySchedule,
    kind: ReducerKind = ReducerKind.GAUSSIAN,
) -> float:
    """RMSE(recoarsen(generated, i, j), condition). Gaussian-only."""
    if ReducerKind(kind) is not ReducerKind.GAUSSIAN:
        raise UnsupportedOperatorError(
            "coarse consistency is only defined for the Gaussian reducer"
        )
    gen = as_values(generated)
    cond = as_values(condition)
    down = as_values(recoarsen(gen, i, j, schedule))
    return float(np.sqrt(np.mean((down - cond) ** 2)))
