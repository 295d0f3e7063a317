"""Token-usage analytics: entropy and the volatility/entropy report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats

from ..core.series import DomainError
from ..core.stats import turning_point_rate


def token_entropy(token_indices, positions: slice | None = None) -> float:
    """Shannon entropy (nats) of the empirical token-index distribution over
    the selected positions of a corpus."""
    arr = np.atleast_2d(np.asarray(token_indices, dtype=np.int64))
    if arr.size == 0:
        raise DomainError("empty token corpus")
    if positions is not None:
        arr = arr[:, positions]
    if arr.size == 0:
        raise DomainError("empty position range")
    _, counts = np.unique(arr, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class VolatilityEntropyReport:
    rows: list[dict]  # per-series turning-point rate + group entropy
    spearman_rho: float
    spearman_p: float


def volatility_vs_entropy_report(
    series: np.ndarray,  # (N, T) generated finest-level corpus
    token_indices: np.ndarray,  # (N, M) re-encoded tokens
    n_groups: int = 10,
) -> VolatilityEntropyReport:
    """Bucket series by jaggedness and report per-group token entropy.

    The Spearman correlation between per-series volatility and the entropy of
    its group is reported with its p-value; no sign is asserted.
    """
    series = np.atleast_2d(np.asarray(series, dtype=np.float64))
    token_indices = np.atleast_2d(np.asarray(token_indices, dtype=np.int64))
    if series.shape[0] != token_indices.shape[0]:
        raise DomainError("series and token corpus sizes differ")
    vol = np.array([turning_point_rate(s) for s in series])
    order = np.argsort(vol, kind="stable")
    groups = np.array_split(order, n_groups)
    ent = np.empty(series.shape[0])
    group_id = np.empty(series.shape[0], dtype=int)
    for g, idx in enumerate(groups):
        if idx.size == 0:
            continue
        e = token_entropy(token_indices[idx])
        ent[idx] = e
        group_id[idx] = g
    rows = [
        {"series": int(i), "volatility": float(vol[i]), "group": int(group_id[i]),
         "group_entropy": float(ent[i])}
        for i in range(series.shape[0])
    ]
    if np.ptp(vol) == 0 or np.ptp(ent) == 0:
        rho, p = 0.0, 1.0
    else:
        rho, p = scipy_stats.spearmanr(vol, ent)
    return VolatilityEntropyReport(rows=rows, spearman_rho=float(rho), spearman_p=float(p))
