"""Discrete token sequences and their coarse-to-fine prefixes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.schedule import GranularitySchedule
from ..core.series import DomainError
from .fsq import DEFAULT_FSQ_LEVELS, code_to_index, index_to_code


@dataclass(frozen=True)
class TokenSequence:
    codes: np.ndarray  # (n, D) digits
    indices: np.ndarray  # (n,) flat mixed-radix indices
    fsq_levels: tuple = DEFAULT_FSQ_LEVELS

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        if codes.ndim != 2 or indices.ndim != 1 or codes.shape[0] != indices.shape[0]:
            raise DomainError("codes must be (n, D) and indices (n,)")
        if not np.array_equal(code_to_index(codes, self.fsq_levels), indices):
            raise DomainError("indices are not the mixed-radix encoding of codes")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @classmethod
    def from_codes(cls, codes, fsq_levels=DEFAULT_FSQ_LEVELS) -> "TokenSequence":
        codes = np.asarray(codes, dtype=np.int64)
        return cls(codes=codes, indices=code_to_index(codes, fsq_levels), fsq_levels=tuple(fsq_levels))

    @classmethod
    def from_indices(cls, indices, fsq_levels=DEFAULT_FSQ_LEVELS) -> "TokenSequence":
        indices = np.asarray(indices, dtype=np.int64)
        return cls(codes=index_to_code(indices, fsq_levels), indices=indices, fsq_levels=tuple(fsq_levels))

    def slice(self, n: int) -> "TokenSequence":
        return TokenSequence(self.codes[:n], self.indices[:n], self.fsq_levels)


def prefix(q: TokenSequence, level: int, schedule: GranularitySchedule) -> TokenSequence:
    """Leading tokens sufficient to decode at the given level."""
    n = schedule.tokens(level)
    if n > len(q):
        raise DomainError(f"sequence of length {len(q)} has no level-{level} prefix")
    return q.slice(n)
