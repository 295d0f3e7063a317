"""Synthetic damped-noisy-sinusoid corpus for bounded desk-scale runs."""

from __future__ import annotations

import numpy as np

# Harmonic stack (multiplier, relative amplitude). Phases are locked to the
# fundamental (m * phi0), so the fine structure of every series is a smooth
# function of a handful of coarse-observable parameters. That keeps the
# decoder's reconstruction floor low at every granularity level, which is
# what makes the coarseness of a reduced view measurable: the reconstruction
# distance cliffs exactly where the probe's detail ends instead of drowning
# in model error. Multipliers are spread (not octaves) so each granularity
# band of the schedule holds real signal energy.
_HARMONICS = ((1, 1.0), (2, 0.7), (3, 0.7), (5, 0.8), (8, 0.9), (12, 1.0))


def make_toy_corpus(
    n: int = 2000,
    t_len: int = 128,
    seed: int = 0,
    noise: float = 0.02,
    n_classes: int = 2,
) -> tuple[np.ndarray, np.ndarray]:
    """Damped noisy sinusoids with phase-locked harmonics, z-normalized per
    corpus (a plucked-string-like waveform family).

    Class c draws its fundamental from a disjoint band, so a label is
    recoverable from the spectrum. Harmonics at or above Nyquist are dropped.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(t_len) / t_len
    labels = rng.integers(0, n_classes, size=n)
    # fundamental bands per class across [1.3, 2.4], separated by guard gaps
    # of 0.75 band widths (n=2: [1.3, 1.7] and [2.0, 2.4])
    width = 1.1 / (1.75 * n_classes - 0.75)
    nyquist = t_len / 2
    out = np.empty((n, t_len))
    for i in range(n):
        f0 = 1.3 + (1.75 * labels[i] + rng.uniform(0.0, 1.0)) * width
        phi = rng.uniform(0, 2 * np.pi)
        damp = rng.uniform(0.5, 2.0)
        amp = rng.uniform(0.8, 1.2)
        x = np.zeros(t_len)
        for m, a in _HARMONICS:
            if m * f0 >= nyquist:
                break
            x += a * np.sin(2 * np.pi * m * f0 * t + m * phi)
        out[i] = amp * np.exp(-damp * t) * x + noise * rng.standard_normal(t_len)
    out = (out - out.mean()) / out.std()
    return out, labels
