"""Finite scalar quantization: per-dimension rounding onto a fixed grid.

Grid for a dimension with ``n`` levels: n equispaced points in [-1, 1].
Codes are digit vectors; flat indices use least-significant-digit-first
mixed radix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from ..core.series import DomainError

DEFAULT_FSQ_LEVELS = (4, 4, 4, 4, 4, 4)


def vocab_size(levels=DEFAULT_FSQ_LEVELS) -> int:
    return int(math.prod(levels))


def fsq_quantize(z, levels=DEFAULT_FSQ_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """Round a bounded latent onto the FSQ grid.

    Returns (digits, grid_values). Inputs are clamped to [-1, 1] first;
    quantization is idempotent on grid values.
    """
    z = np.asarray(z, dtype=np.float64)
    lv = np.asarray(levels, dtype=np.float64)
    if z.shape[-1] != lv.shape[0]:
        raise DomainError(f"latent dim {z.shape[-1]} != {lv.shape[0]} FSQ dims")
    z = np.clip(z, -1.0, 1.0)
    digits = np.rint((z + 1.0) * (lv - 1.0) / 2.0).astype(np.int64)
    values = digits / (lv - 1.0) * 2.0 - 1.0
    return digits, values


def code_to_index(code, levels=DEFAULT_FSQ_LEVELS) -> np.ndarray:
    """Mixed-radix encoding, least-significant digit first."""
    code = np.asarray(code, dtype=np.int64)
    lv = np.asarray(levels, dtype=np.int64)
    if code.shape[-1] != lv.shape[0]:
        raise DomainError(f"code width {code.shape[-1]} != {lv.shape[0]}")
    if np.any(code < 0) or np.any(code >= lv):
        raise DomainError("digit out of range for FSQ levels")
    radix = np.concatenate([[1], np.cumprod(lv[:-1])])
    return (code * radix).sum(axis=-1)


def index_to_code(index, levels=DEFAULT_FSQ_LEVELS) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64)
    lv = np.asarray(levels, dtype=np.int64)
    if np.any(index < 0) or np.any(index >= vocab_size(levels)):
        raise DomainError("index out of vocabulary range")
    digits = np.empty(index.shape + (lv.shape[0],), dtype=np.int64)
    rem = index.copy()
    for d in range(lv.shape[0]):
        digits[..., d] = rem % lv[d]
        rem //= lv[d]
    return digits


class FSQ(torch.nn.Module):
    """Torch FSQ layer with straight-through gradients.

    Input is unbounded; a tanh squash maps it into (-1, 1) before rounding.
    """

    def __init__(self, levels=DEFAULT_FSQ_LEVELS):
        super().__init__()
        self.levels = tuple(levels)
        self.register_buffer("_lv", torch.tensor(levels, dtype=torch.float32))

    def forward(self, z: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Return (quantized grid values with STE, integer digits, bounded latent)."""
        bounded = torch.tanh(z)
        half = (self._lv - 1.0) / 2.0
        digits = torch.round((bounded + 1.0) * half)
        values = digits / half - 1.0
        values = bounded + (values - bounded).detach()  # straight-through
        return values, digits.long(), bounded


def fsq_entropy_aux(bounded: torch.Tensor, levels=DEFAULT_FSQ_LEVELS,
                    temperature: float = 0.1) -> torch.Tensor:
    """Codebook-usage regularizer against collapse.

    Soft-assigns each bounded latent dimension to its grid points and returns
    (mean per-sample assignment entropy) - (entropy of the batch-average
    assignment): minimizing sharpens individual codes while spreading usage
    across the grid.
    """
    lv = list(levels)
    loss = bounded.new_zeros(())
    for d, n in enumerate(lv):
        grid = torch.linspace(-1.0, 1.0, n, device=bounded.device)
        logits = -((bounded[..., d : d + 1] - grid) ** 2) / temperature
        probs = torch.softmax(logits, dim=-1)
        logp = torch.log_softmax(logits, dim=-1)
        per_sample = -(probs * logp).sum(-1).mean()
        avg = probs.reshape(-1, n).mean(0).clamp_min(1e-12)
        batch_entropy = -(avg * avg.log()).sum()
        loss = loss + per_sample - batch_entropy
    return loss / len(lv)
