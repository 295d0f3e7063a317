"""Fréchet distance between Gaussians fit to feature embeddings."""

from __future__ import annotations

import warnings

import numpy as np

from ..core.series import DomainError

_PSD_TOL = 1e-8


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition; small negative
    eigenvalues are clipped, large ones warn."""
    sym = (mat + mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -_PSD_TOL * max(abs(vals.max()), 1.0):
        warnings.warn(
            f"covariance square root clipped eigenvalue {vals.min():.3e}",
            RuntimeWarning,
        )
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(real_features: np.ndarray, synth_features: np.ndarray) -> float:
    """||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}).

    The cross term is computed as the trace of sqrt(S1^{1/2} S2 S1^{1/2}),
    which is symmetric PSD and equals Tr((S1 S2)^{1/2}).
    """
    a = np.atleast_2d(np.asarray(real_features, dtype=np.float64))
    b = np.atleast_2d(np.asarray(synth_features, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DomainError(f"feature dims differ: {a.shape[1]} vs {b.shape[1]}")
    mu1, mu2 = a.mean(axis=0), b.mean(axis=0)
    s1 = np.cov(a, rowvar=False, ddof=1).reshape(a.shape[1], a.shape[1])
    s2 = np.cov(b, rowvar=False, ddof=1).reshape(b.shape[1], b.shape[1])
    r1 = _sqrtm_psd(s1)
    cross = _sqrtm_psd(r1 @ s2 @ r1)
    val = float(np.sum((mu1 - mu2) ** 2) + np.trace(s1) + np.trace(s2) - 2.0 * np.trace(cross))
    return max(val, 0.0)
