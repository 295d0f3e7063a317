"""Hierarchical register tokenizer: patch embedding, transformer encoder with
learnable register slots, and FSQ discretization."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
import torch
import torch.nn as nn

from ..core.schedule import GranularitySchedule
from ..core.series import DomainError, as_values
from .checkpoint import load_checkpoint, save_checkpoint
from .fsq import DEFAULT_FSQ_LEVELS, FSQ
from .nn import SelfAttnBlock
from .tokens import TokenSequence

TOKENIZER_VERSION = "timetok-tok-v1"


@dataclass(frozen=True)
class TokenizerConfig:
    series_length: int = 128
    patch_count: int = 16
    hidden_dim: int = 128
    depth: int = 4
    heads: int = 4
    fsq_levels: tuple = DEFAULT_FSQ_LEVELS
    schedule: GranularitySchedule = field(default_factory=GranularitySchedule)

    def __post_init__(self):
        if self.schedule.total_tokens < 1:
            raise DomainError("register count must be positive")
        object.__setattr__(self, "fsq_levels", tuple(self.fsq_levels))

    @property
    def register_count(self) -> int:
        return self.schedule.total_tokens

    @property
    def patch_length(self) -> int:
        # right-pad by edge replication when T is not divisible by W
        return -(-self.series_length // self.patch_count)

    @property
    def padded_length(self) -> int:
        return self.patch_length * self.patch_count

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fsq_levels"] = list(self.fsq_levels)
        d["schedule"] = self.schedule.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        d = dict(d)
        d["schedule"] = GranularitySchedule.from_dict(d["schedule"])
        d["fsq_levels"] = tuple(d["fsq_levels"])
        return cls(**d)


class TokenizerEncoder(nn.Module):
    def __init__(self, config: TokenizerConfig):
        super().__init__()
        self.config = config
        c = config
        self.patch_proj = nn.Linear(c.patch_length, c.hidden_dim)
        self.registers = nn.Parameter(torch.randn(c.register_count, c.hidden_dim) * 0.02)
        self.pos = nn.Parameter(
            torch.randn(c.patch_count + c.register_count, c.hidden_dim) * 0.02
        )
        self.blocks = nn.ModuleList(
            SelfAttnBlock(c.hidden_dim, c.heads) for _ in range(c.depth)
        )
        self.norm = nn.LayerNorm(c.hidden_dim)
        self.to_latent = nn.Linear(c.hidden_dim, len(c.fsq_levels))
        self.fsq = FSQ(c.fsq_levels)

    def patchify(self, x: torch.Tensor) -> torch.Tensor:
        b, t = x.shape
        c = self.config
        if t != c.series_length:
            raise DomainError(f"series length {t} != configured {c.series_length}")
        if t < c.padded_length:
            pad = x[:, -1:].expand(b, c.padded_length - t)
            x = torch.cat([x, pad], dim=1)
        return x.view(b, c.patch_count, c.patch_length)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """x: (B, T) -> (quantized register values (B, M, D), digits (B, M, D))."""
        b = x.shape[0]
        patches = self.patch_proj(self.patchify(x))
        regs = self.registers.unsqueeze(0).expand(b, -1, -1)
        h = torch.cat([patches, regs], dim=1) + self.pos.unsqueeze(0)
        for blk in self.blocks:
            h = blk(h)
        h = self.norm(h[:, self.config.patch_count :])
        return self.fsq(self.to_latent(h))


def encode(x, model: TokenizerEncoder) -> TokenSequence:
    """Tokenize a single series into its M register codes (deterministic)."""
    values = as_values(x)
    model.eval()
    with torch.no_grad():
        _, digits, _ = model(torch.from_numpy(values).float().unsqueeze(0))
    return TokenSequence.from_codes(digits[0].numpy(), model.config.fsq_levels)


def encode_batch(values: np.ndarray, model: TokenizerEncoder, batch_size: int = 256) -> np.ndarray:
    """Tokenize (N, T) -> flat indices (N, M)."""
    from .fsq import code_to_index

    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, values.shape[0], batch_size):
            chunk = torch.from_numpy(values[start : start + batch_size]).float()
            _, digits, _ = model(chunk)
            out.append(code_to_index(digits.numpy(), model.config.fsq_levels))
    return np.concatenate(out, axis=0)


def save_tokenizer(path, model: TokenizerEncoder) -> None:
    save_checkpoint(path, TOKENIZER_VERSION, model.config.to_dict(), model.state_dict())


def load_tokenizer(path) -> TokenizerEncoder:
    config, state = load_checkpoint(path, TOKENIZER_VERSION)
    model = TokenizerEncoder(TokenizerConfig.from_dict(config))
    model.load_state_dict(state)
    model.eval()
    return model
