"""Granularity-controllable generation: level measurement, refinement,
unconditional sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core.series import DomainError, as_values
from ..models.flow import decode_batch
from ..models.tokenizer import encode_batch
from ..models.var import generate_tokens
from .bundle import ModelBundle


class LevelConflictError(DomainError):
    """Resolved source level is not below the requested target level."""


@dataclass(frozen=True)
class LevelMeasurement:
    distances: tuple[float, ...]  # d_1 .. d_L
    improvements: tuple[float, ...]  # r_2 .. r_L
    level: int
    threshold: float


def choose_level(distances, threshold: float = 0.05) -> tuple[int, tuple[float, ...]]:
    """Pick the level with the highest relative distance improvement.

    Falls back to level 1 when no improvement clears the threshold; ties go
    to the smallest level.
    """
    d = np.asarray(distances, dtype=np.float64)
    improvements = (d[:-1] - d[1:]) / np.maximum(d[:-1], 1e-12)
    if improvements.size == 0 or improvements.max() <= threshold:
        return 1, tuple(improvements.tolist())
    return int(np.argmax(improvements)) + 2, tuple(improvements.tolist())


def measure_level_batch(
    values: np.ndarray,  # (B, T)
    bundle: ModelBundle,
    steps: int | None = None,
    seed: int = 0,
    threshold: float = 0.05,
    draws: int = 1,
) -> list[LevelMeasurement]:
    """Tokenize at the finest level, decode every level, and pick the level
    of highest relative improvement.

    By default each level is decoded once from a fixed seeded noise draw.
    Setting `draws > 1` decodes that many times with distinct fixed seeds and
    averages the decodes before taking distances, which removes the noise
    floor the stochastic part of the decode puts under every distance.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    sched = bundle.schedule
    tokens = encode_batch(values, bundle.tokenizer)
    b = values.shape[0]
    dists = np.empty((b, sched.n_levels))
    for level in range(1, sched.n_levels + 1):
        n_l = sched.tokens(level)
        rec = np.zeros_like(values)
        for draw in range(max(1, draws)):
            rec += decode_batch(
                tokens[:, :n_l], level, bundle.decoder, steps=steps,
                seed=np.arange(b) + seed + 7919 * draw,
            )
        rec /= max(1, draws)
        dists[:, level - 1] = np.linalg.norm(rec - values, axis=1)
    out = []
    for i in range(b):
        level, improvements = choose_level(dists[i], threshold)
        out.append(
            LevelMeasurement(
                distances=tuple(dists[i].tolist()),
                improvements=improvements,
                level=level,
                threshold=threshold,
            )
        )
    return out


def measure_level(x, bundle: ModelBundle, steps: int | None = None,
                  seed: int = 0, threshold: float = 0.05,
                  draws: int = 1) -> LevelMeasurement:
    return measure_level_batch(
        as_values(x)[None, :], bundle, steps, seed, threshold, draws
    )[0]


@dataclass(frozen=True)
class RefinementJob:
    condition: np.ndarray
    target_level: int
    source_level: Optional[int] = None  # None -> measure
    n_samples: int = 5
    temperature: float = 1.0
    top_k: int = 64
    class_label: Optional[int] = None
    seed: int = 0
    steps: Optional[int] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError("need at least one sample")
        object.__setattr__(
            self, "condition", np.asarray(self.condition, dtype=np.float64)
        )


@dataclass(frozen=True)
class RefinementResult:
    samples: np.ndarray  # (K, T)
    source_level: int
    target_level: int
    prefix_length: int
    prefix_indices: np.ndarray
    seeds: tuple[int, ...]


def refine(job: RefinementJob, bundle: ModelBundle) -> RefinementResult:
    """Encode the condition, keep its level-i prefix, autoregressively extend
    to level j with K independent seeds, and decode each sample."""
    sched = bundle.schedule
    if not 1 <= job.target_level <= sched.n_levels:
        raise DomainError(f"target level {job.target_level} outside [1, {sched.n_levels}]")
    source = job.source_level
    if source is None:
        source = measure_level(job.condition, bundle, steps=job.steps, seed=job.seed).level
    if not 1 <= source <= sched.n_levels:
        raise DomainError(f"source level {source} outside [1, {sched.n_levels}]")
    if source >= job.target_level:
        raise LevelConflictError(
            f"source level {source} >= target level {job.target_level}; "
            "raise the target level"
        )
    tokens = encode_batch(job.condition[None, :], bundle.tokenizer)[0]
    n_i = sched.tokens(source)
    prefix_indices = tokens[:n_i]
    seeds = tuple(int(job.seed) + k for k in range(job.n_samples))
    full = generate_tokens(
        np.tile(prefix_indices, (job.n_samples, 1)),
        source,
        job.target_level,
        bundle.var,
        temperature=job.temperature,
        top_k=job.top_k,
        class_labels=None if job.class_label is None else job.class_label,
        seed=job.seed,
        batch=job.n_samples,
    )
    assert np.array_equal(full[:, :n_i], np.tile(prefix_indices, (job.n_samples, 1)))
    samples = decode_batch(
        full, job.target_level, bundle.decoder, steps=job.steps, seed=np.array(seeds)
    )
    return RefinementResult(
        samples=samples,
        source_level=source,
        target_level=job.target_level,
        prefix_length=n_i,
        prefix_indices=prefix_indices,
        seeds=seeds,
    )


def generate_unconditional(
    level: int,
    n: int,
    bundle: ModelBundle,
    class_label: Optional[int] = None,
    temperature: float = 1.0,
    top_k: int = 64,
    seed: int = 0,
    steps: Optional[int] = None,
    return_tokens: bool = False,
):
    """Sample n series at a granularity level from the start embedding alone."""
    sched = bundle.schedule
    if not 1 <= level <= sched.n_levels:
        raise DomainError(f"level {level} outside [1, {sched.n_levels}]")
    tokens = generate_tokens(
        None, 0, level, bundle.var,
        temperature=temperature, top_k=top_k,
        class_labels=None if class_label is None else class_label,
        seed=seed, batch=n,
    )
    seeds = np.arange(n) + seed
    series = decode_batch(tokens, level, bundle.decoder, steps=steps, seed=seeds)
    if return_tokens:
        return series, tokens
    return series
