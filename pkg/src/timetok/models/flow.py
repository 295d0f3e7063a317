"""Token-conditioned flow-matching decoder.

Training transports standard normal noise to the level-target along straight
paths; the velocity network conditions on a coarse-to-fine token prefix via
cross-attention and decodes by explicit Euler integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
import torch
import torch.nn as nn

from ..core.schedule import GranularitySchedule
from ..core.series import DomainError, as_values, like
from .checkpoint import load_checkpoint, save_checkpoint
from .fsq import DEFAULT_FSQ_LEVELS, vocab_size
from .nn import CrossAttnBlock, sinusoidal_embedding
from .tokens import TokenSequence

DECODER_VERSION = "timetok-dec-v1"


@dataclass(frozen=True)
class DecoderConfig:
    series_length: int = 128
    patch_count: int = 16
    hidden_dim: int = 128
    depth: int = 3
    heads: int = 4
    steps: int = 50  # default Euler integration steps
    fsq_levels: tuple = DEFAULT_FSQ_LEVELS
    schedule: GranularitySchedule = field(default_factory=GranularitySchedule)

    def __post_init__(self):
        if self.steps < 1:
            raise DomainError("need at least one integration step")
        object.__setattr__(self, "fsq_levels", tuple(self.fsq_levels))

    @property
    def vocab(self) -> int:
        return vocab_size(self.fsq_levels)

    @property
    def patch_length(self) -> int:
        return -(-self.series_length // self.patch_count)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fsq_levels"] = list(self.fsq_levels)
        d["schedule"] = self.schedule.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderConfig":
        d = dict(d)
        d["schedule"] = GranularitySchedule.from_dict(d["schedule"])
        d["fsq_levels"] = tuple(d["fsq_levels"])
        return cls(**d)


def interpolate(x_l, eps, tau: float):
    """Straight-path state between noise (tau=0) and the clean target (tau=1)."""
    xv, ev = as_values(x_l), as_values(eps)
    if xv.shape != ev.shape:
        raise DomainError("series and noise must have equal length")
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    return like(x_l, (1.0 - tau) * ev + tau * xv)


def velocity_target(x_l, eps):
    """Straight-path velocity: clean target minus noise, independent of tau."""
    xv, ev = as_values(x_l), as_values(eps)
    if xv.shape != ev.shape:
        raise DomainError("series and noise must have equal length")
    return like(x_l, xv - ev)


def grid_values(code_indices: torch.Tensor, fsq_levels) -> torch.Tensor:
    """FSQ grid values corresponding to flat indices (no gradient path)."""
    from .fsq import index_to_code

    digits = index_to_code(code_indices.detach().cpu().numpy(), fsq_levels)
    lv = np.asarray(fsq_levels, dtype=np.float64)
    values = digits / (lv - 1.0) * 2.0 - 1.0
    return torch.from_numpy(values).float().to(code_indices.device)


class VelocityNetwork(nn.Module):
    """Transformer over value patches with cross-attention to code embeddings.

    The prefix length (hence the granularity level) is conveyed implicitly by
    how many conditioning tokens are visible.
    """

    def __init__(self, config: DecoderConfig):
        super().__init__()
        self.config = config
        c = config
        self.patch_proj = nn.Linear(c.patch_length, c.hidden_dim)
        self.pos = nn.Parameter(torch.randn(c.patch_count, c.hidden_dim) * 0.02)
        self.code_embed = nn.Embedding(c.vocab, c.hidden_dim)
        # grid-value projection: carries the straight-through gradient back
        # into the encoder during joint training
        self.quant_proj = nn.Linear(len(c.fsq_levels), c.hidden_dim)
        self.slot_pos = nn.Parameter(
            torch.randn(c.schedule.total_tokens, c.hidden_dim) * 0.02
        )
        self.tau_proj = nn.Sequential(
            nn.Linear(c.hidden_dim, c.hidden_dim), nn.GELU(), nn.Linear(c.hidden_dim, c.hidden_dim)
        )
        # pooled shortcut over the visible prefix; gives the encoder a direct
        # gradient path on top of cross-attention
        self.ctx_pool = nn.Sequential(
            nn.Linear(c.hidden_dim, c.hidden_dim), nn.GELU(), nn.Linear(c.hidden_dim, c.hidden_dim)
        )
        self.blocks = nn.ModuleList(
            CrossAttnBlock(c.hidden_dim, c.heads) for _ in range(c.depth)
        )
        self.norm = nn.LayerNorm(c.hidden_dim)
        self.out = nn.Linear(c.hidden_dim, c.patch_length)

    def forward(
        self,
        x_tau: torch.Tensor,  # (B, T)
        tau: torch.Tensor,  # (B,)
        code_indices: torch.Tensor,  # (B, M) flat indices, padded past prefix
        prefix_len: torch.Tensor,  # (B,) visible conditioning tokens
        quantized: torch.Tensor | None = None,  # (B, M, D) FSQ grid values
    ) -> torch.Tensor:
        b, t = x_tau.shape
        c = self.config
        padded = c.patch_count * c.patch_length
        if t < padded:
            x_tau = torch.cat([x_tau, x_tau[:, -1:].expand(b, padded - t)], dim=1)
        h = self.patch_proj(x_tau.view(b, c.patch_count, c.patch_length))
        h = h + self.pos.unsqueeze(0)
        h = h + self.tau_proj(sinusoidal_embedding(tau, c.hidden_dim)).unsqueeze(1)
        if quantized is None:
            quantized = grid_values(code_indices, c.fsq_levels)
        ctx = (
            self.code_embed(code_indices)
            + self.quant_proj(quantized)
            + self.slot_pos[: code_indices.shape[1]].unsqueeze(0)
        )
        slots = torch.arange(code_indices.shape[1], device=x_tau.device)
        pad_mask = slots.unsqueeze(0) >= prefix_len.unsqueeze(1)  # True -> masked out
        visible = (~pad_mask).float().unsqueeze(-1)
        pooled = (ctx * visible).sum(dim=1) / visible.sum(dim=1).clamp(min=1.0)
        h = h + self.ctx_pool(pooled).unsqueeze(1)
        for blk in self.blocks:
            h = blk(h, ctx, ctx_padding_mask=pad_mask)
        v = self.out(self.norm(h)).view(b, padded)
        return v[:, :t]


def decode_batch(
    indices: np.ndarray,  # (B, n) flat prefix indices, same level for all rows
    level: int,
    model: VelocityNetwork,
    steps: int | None = None,
    seed: int | np.ndarray = 0,
) -> np.ndarray:
    """Integrate the velocity field from seeded noise; (B, T) output."""
    c = model.config
    n_expect = c.schedule.tokens(level)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 2 or indices.shape[1] != n_expect:
        raise DomainError(
            f"prefix width {indices.shape[-1]} != n_{level}={n_expect}"
        )
    steps = c.steps if steps is None else int(steps)
    if steps < 1:
        raise DomainError("steps must be >= 1")
    b = indices.shape[0]
    seeds = np.full(b, seed, dtype=np.int64) if np.isscalar(seed) else np.asarray(seed)
    eps = np.stack(
        [np.random.default_rng(int(s)).standard_normal(c.series_length) for s in seeds]
    )
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy(eps).float()
        codes = torch.from_numpy(indices)
        plen = torch.full((b,), n_expect, dtype=torch.long)
        dt = 1.0 / steps
        for k in range(steps):
            tau = torch.full((b,), k * dt)
            x = x + dt * model(x, tau, codes, plen)
    return x.numpy().astype(np.float64)


def decode(q_prefix: TokenSequence, level: int, model: VelocityNetwork,
           steps: int | None = None, seed: int = 0) -> np.ndarray:
    """Decode one token prefix into a series (deterministic given seed)."""
    return decode_batch(q_prefix.indices[None, :], level, model, steps, seed)[0]


def ctf_loss(
    x: torch.Tensor,  # (B, T) raw series
    targets: torch.Tensor,  # (B, L, T) precomputed level reductions
    encoder,  # TokenizerEncoder (gradients flow through FSQ STE)
    velocity: VelocityNetwork,
    generator: torch.Generator | None = None,
    levels: torch.Tensor | None = None,
    entropy_weight: float = 0.1,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Coarse-to-fine flow-matching objective.

    Per element: draw a uniform level, uniform tau and standard-normal noise;
    regress the conditioned velocity onto (target - noise). A small codebook
    entropy term keeps token usage from collapsing. Returns the batch loss
    and the per-element squared errors (for per-level bookkeeping).
    """
    from .fsq import code_to_index, fsq_entropy_aux

    b, t = x.shape
    sched = velocity.config.schedule
    n_levels = sched.n_levels
    if levels is None:
        levels = torch.randint(1, n_levels + 1, (b,), generator=generator)
    tau = torch.rand(b, generator=generator)
    eps = torch.randn(b, t, generator=generator)

    values, digits, bounded = encoder(x)  # (B, M, D) quantized with STE
    # flat indices for the embedding table; gradient reaches the encoder via
    # a learned projection of the quantized values added to the embeddings
    idx = torch.from_numpy(
        code_to_index(digits.detach().numpy(), velocity.config.fsq_levels)
    )
    x_l = targets[torch.arange(b), levels - 1]
    x_tau = (1.0 - tau[:, None]) * eps + tau[:, None] * x_l
    v_target = x_l - eps
    budgets = torch.tensor(sched.budgets, dtype=torch.long)
    plen = budgets[levels - 1]
    v_pred = velocity(x_tau, tau, idx, plen, quantized=values)
    per_elem = ((v_pred - v_target) ** 2).mean(dim=1)
    if not torch.isfinite(per_elem).all():
        raise FloatingPointError("non-finite flow-matching loss")
    loss = per_elem.mean()
    if entropy_weight and encoder.training:
        loss = loss + entropy_weight * fsq_entropy_aux(bounded, velocity.config.fsq_levels)
    return loss, per_elem.detach()


def save_decoder(path, model: VelocityNetwork) -> None:
    save_checkpoint(path, DECODER_VERSION, model.config.to_dict(), model.state_dict())


def load_decoder(path) -> VelocityNetwork:
    config, state = load_checkpoint(path, DECODER_VERSION)
    model = VelocityNetwork(DecoderConfig.from_dict(config))
    model.load_state_dict(state)
    model.eval()
    return model
