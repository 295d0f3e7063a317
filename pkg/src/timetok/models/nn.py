"""Shared transformer building blocks (pre-norm, CPU-sized)."""

from __future__ import annotations

import math

import torch
import torch.nn as nn


class Mlp(nn.Module):
    def __init__(self, dim: int, ratio: int = 4):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(dim, dim * ratio), nn.GELU(), nn.Linear(dim * ratio, dim)
        )

    def forward(self, x):
        return self.net(x)


class SelfAttnBlock(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim)

    def forward(self, x, attn_mask=None):
        h = self.norm1(x)
        h, _ = self.attn(h, h, h, attn_mask=attn_mask, need_weights=False)
        x = x + h
        return x + self.mlp(self.norm2(x))


class CrossAttnBlock(nn.Module):
    """Self-attention over the sequence plus cross-attention to a context."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.self_attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.cross_attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm_ctx = nn.LayerNorm(dim)
        self.norm3 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim)

    def forward(self, x, ctx, ctx_padding_mask=None):
        h = self.norm1(x)
        h, _ = self.self_attn(h, h, h, need_weights=False)
        x = x + h
        c = self.norm_ctx(ctx)
        h, _ = self.cross_attn(
            self.norm2(x), c, c, key_padding_mask=ctx_padding_mask, need_weights=False
        )
        x = x + h
        return x + self.mlp(self.norm3(x))


class AdaLNBlock(nn.Module):
    """Pre-norm block whose normalization scale/shift is modulated by a
    conditioning vector (class embedding)."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim, elementwise_affine=False)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim, elementwise_affine=False)
        self.mlp = Mlp(dim)
        self.modulation = nn.Linear(dim, 6 * dim)
        nn.init.zeros_(self.modulation.weight)
        nn.init.zeros_(self.modulation.bias)

    def forward(self, x, cond, attn_mask=None):
        s1, b1, g1, s2, b2, g2 = self.modulation(cond).unsqueeze(1).chunk(6, dim=-1)
        h = self.norm1(x) * (1 + s1) + b1
        h, _ = self.attn(h, h, h, attn_mask=attn_mask, need_weights=False)
        x = x + g1 * h
        h = self.norm2(x) * (1 + s2) + b2
        return x + g2 * self.mlp(h)


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Standard sinusoidal embedding of a scalar in [0, 1]."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device) / half
    )
    ang = t.float().unsqueeze(-1) * freqs * 1000.0
    return torch.cat([torch.sin(ang), torch.cos(ang)], dim=-1)
