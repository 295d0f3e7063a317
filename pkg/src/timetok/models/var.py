"""Block-autoregressive transformer over granularity blocks.

Each block of token positions is predicted in parallel from all coarser
blocks (block-causal attention); class conditioning enters through adaptive
layer normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.schedule import GranularitySchedule
from ..core.series import DomainError
from .checkpoint import load_checkpoint, save_checkpoint
from .fsq import DEFAULT_FSQ_LEVELS, vocab_size
from .nn import AdaLNBlock
from .tokens import TokenSequence

VAR_VERSION = "timetok-var-v1"


@dataclass(frozen=True)
class BlockLayout:
    boundaries: tuple[int, ...]  # (0, n_1, ..., n_L)

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if b[0] != 0 or any(y <= x for x, y in zip(b, b[1:])):
            raise DomainError(f"boundaries must start at 0 and increase: {b}")
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def from_schedule(cls, schedule: GranularitySchedule) -> "BlockLayout":
        return cls(boundaries=(0,) + schedule.budgets)

    @property
    def n_blocks(self) -> int:
        return len(self.boundaries) - 1

    @property
    def total(self) -> int:
        return self.boundaries[-1]

    @property
    def level_ids(self) -> np.ndarray:
        """Per-position granularity level, 1-based."""
        out = np.empty(self.total, dtype=np.int64)
        for l in range(1, self.n_blocks + 1):
            out[self.boundaries[l - 1] : self.boundaries[l]] = l
        return out

    def block_slice(self, level: int) -> slice:
        if not 1 <= level <= self.n_blocks:
            raise DomainError(f"level {level} outside [1, {self.n_blocks}]")
        return slice(self.boundaries[level - 1], self.boundaries[level])


def block_causal_mask(layout: BlockLayout) -> np.ndarray:
    """allowed(p, q) iff level(q) <= level(p): full attention within the own
    block, everything in coarser blocks, nothing finer."""
    lev = layout.level_ids
    return lev[None, :] <= lev[:, None]


@dataclass(frozen=True)
class VarConfig:
    hidden_dim: int = 128
    depth: int = 4
    heads: int = 4
    n_classes: int = 0  # 0 -> unconditional only
    fsq_levels: tuple = DEFAULT_FSQ_LEVELS
    schedule: GranularitySchedule = field(default_factory=GranularitySchedule)
    temperature: float = 1.0
    top_k: int = 64

    def __post_init__(self):
        object.__setattr__(self, "fsq_levels", tuple(self.fsq_levels))

    @property
    def vocab(self) -> int:
        return vocab_size(self.fsq_levels)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fsq_levels"] = list(self.fsq_levels)
        d["schedule"] = self.schedule.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VarConfig":
        d = dict(d)
        d["schedule"] = GranularitySchedule.from_dict(d["schedule"])
        d["fsq_levels"] = tuple(d["fsq_levels"])
        return cls(**d)


class VarTransformer(nn.Module):
    def __init__(self, config: VarConfig):
        super().__init__()
        self.config = config
        c = config
        self.layout = BlockLayout.from_schedule(c.schedule)
        self.token_embed = nn.Embedding(c.vocab, c.hidden_dim)
        self.level_embed = nn.Embedding(c.schedule.n_levels + 1, c.hidden_dim)  # +start slot
        max_block = max(c.schedule.block_sizes)
        self.inblock_pos = nn.Embedding(max_block, c.hidden_dim)
        self.start = nn.Parameter(torch.randn(c.hidden_dim) * 0.02)
        # class index n_classes is the reserved null class
        self.class_embed = nn.Embedding(c.n_classes + 1, c.hidden_dim)
        self.blocks = nn.ModuleList(
            AdaLNBlock(c.hidden_dim, c.heads) for _ in range(c.depth)
        )
        self.norm = nn.LayerNorm(c.hidden_dim)
        self.head = nn.Linear(c.hidden_dim, c.vocab)
        mask = torch.from_numpy(~block_causal_mask(self.layout))
        self.register_buffer("attn_mask", mask)  # True -> disallowed

    def _cond(self, class_labels, batch: int) -> torch.Tensor:
        if class_labels is None:
            idx = torch.full((batch,), self.config.n_classes, dtype=torch.long)
        else:
            idx = torch.as_tensor(class_labels, dtype=torch.long)
            if idx.ndim == 0:
                idx = idx.expand(batch)
            if torch.any(idx < 0) or torch.any(idx > self.config.n_classes):
                raise DomainError("class label out of range")
        return self.class_embed(idx)

    def build_teacher_inputs(self, indices: torch.Tensor, class_labels=None) -> torch.Tensor:
        """Teacher-forced inputs: block 1 sees the start embedding; block l > 1
        sees a nearest-neighbor upsampling of block l-1's token embeddings."""
        b, m = indices.shape
        lay = self.layout
        if m != lay.total:
            raise DomainError(f"token width {m} != layout total {lay.total}")
        c = self.config
        parts = [self.start.unsqueeze(0).unsqueeze(0).expand(b, lay.boundaries[1], -1)]
        emb = self.token_embed(indices)
        for l in range(2, lay.n_blocks + 1):
            prev = emb[:, lay.block_slice(l - 1)]
            cur_n = lay.boundaries[l] - lay.boundaries[l - 1]
            src = (torch.arange(cur_n) * prev.shape[1]) // cur_n
            parts.append(prev[:, src])
        h = torch.cat(parts, dim=1)
        lev = torch.from_numpy(lay.level_ids)
        h = h + self.level_embed(lev - 1).unsqueeze(0)
        pos = np.concatenate([np.arange(n) for n in np.diff(lay.boundaries)])
        h = h + self.inblock_pos(torch.from_numpy(pos)).unsqueeze(0)
        return h

    def forward_teacher(self, indices: torch.Tensor, class_labels=None) -> torch.Tensor:
        """Logits (B, M, vocab) under teacher forcing."""
        h = self.build_teacher_inputs(indices, class_labels)
        cond = self._cond(class_labels, indices.shape[0])
        for blk in self.blocks:
            h = blk(h, cond, attn_mask=self.attn_mask[: h.shape[1], : h.shape[1]])
        return self.head(self.norm(h))

    def forward_prefix(self, indices: torch.Tensor, level: int, class_labels=None) -> torch.Tensor:
        """Logits for block `level` given tokens of blocks 1..level-1.

        indices: (B, n_{level-1}); returns (B, block_size, vocab).
        """
        b = indices.shape[0]
        lay = self.layout
        n_prev = lay.boundaries[level - 1]
        if indices.shape[1] != n_prev:
            raise DomainError(f"context width {indices.shape[1]} != n_{level-1}={n_prev}")
        n_cur = lay.boundaries[level]
        full = torch.zeros(b, lay.total, dtype=torch.long)
        full[:, :n_prev] = indices
        # teacher inputs for positions < n_cur depend only on blocks < level,
        # so the zero fill is never read; truncating keeps sampling cheap
        h = self.build_teacher_inputs(full, class_labels)[:, :n_cur]
        cond = self._cond(class_labels, b)
        for blk in self.blocks:
            h = blk(h, cond, attn_mask=self.attn_mask[:n_cur, :n_cur])
        logits = self.head(self.norm(h))
        return logits[:, lay.boundaries[level - 1] :]


def var_loss(
    indices: torch.Tensor,  # (B, M)
    model: VarTransformer,
    class_labels=None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-sequence negative log-likelihood (summed over all M positions,
    averaged over the batch) plus the per-block breakdown."""
    logits = model.forward_teacher(indices, class_labels)
    nll = F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), indices.reshape(-1), reduction="none"
    ).view(indices.shape)
    lay = model.layout
    per_block = torch.stack(
        [nll[:, lay.block_slice(l)].sum(dim=1).mean() for l in range(1, lay.n_blocks + 1)]
    )
    return nll.sum(dim=1).mean(), per_block.detach()


def sample_block(
    context: torch.Tensor,  # (B, n_{level-1})
    level: int,
    model: VarTransformer,
    temperature: float = 1.0,
    top_k: int = 64,
    class_labels=None,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Sample all positions of one block in a single parallel step."""
    if temperature < 0:
        raise DomainError("temperature must be >= 0")
    if top_k < 1:
        raise DomainError("top_k must be >= 1")
    with torch.no_grad():
        logits = model.forward_prefix(context, level, class_labels)
        if temperature == 0 or top_k == 1:
            return logits.argmax(dim=-1)
        logits = logits / temperature
        if top_k < logits.shape[-1]:
            kth = torch.topk(logits, top_k, dim=-1).values[..., -1:]
            logits = logits.masked_fill(logits < kth, float("-inf"))
        probs = F.softmax(logits, dim=-1)
        flat = probs.view(-1, probs.shape[-1])
        draw = torch.multinomial(flat, 1, generator=generator)
        return draw.view(probs.shape[:-1])


def generate_tokens(
    prefix_indices: np.ndarray | None,  # (n_i,) or (B, n_i) or None/empty
    source_level: int,
    target_level: int,
    model: VarTransformer,
    temperature: float = 1.0,
    top_k: int = 64,
    class_labels=None,
    seed: int = 0,
    batch: int = 1,
) -> np.ndarray:
    """Extend a level-`source_level` prefix to level `target_level`.

    source_level = 0 with an empty prefix is fully unconditional generation.
    The supplied prefix is returned unmodified at the head of the output.
    """
    lay = model.layout
    if not 0 <= source_level < target_level <= lay.n_blocks:
        raise DomainError(
            f"need 0 <= i < j <= {lay.n_blocks}, got i={source_level}, j={target_level}"
        )
    n_i = lay.boundaries[source_level]
    if prefix_indices is None:
        prefix_indices = np.zeros((batch, 0), dtype=np.int64)
    prefix_indices = np.asarray(prefix_indices, dtype=np.int64)
    if prefix_indices.ndim == 1:
        prefix_indices = np.tile(prefix_indices[None, :], (batch, 1))
    if prefix_indices.shape[1] != n_i:
        raise DomainError(
            f"prefix width {prefix_indices.shape[1]} != n_{source_level}={n_i}"
        )
    gen = torch.Generator().manual_seed(int(seed))
    ctx = torch.from_numpy(prefix_indices)
    for level in range(source_level + 1, target_level + 1):
        block = sample_block(
            ctx, level, model, temperature=temperature, top_k=top_k,
            class_labels=class_labels, generator=gen,
        )
        ctx = torch.cat([ctx, block], dim=1)
    return ctx.numpy()


def save_var(path, model: VarTransformer) -> None:
    save_checkpoint(path, VAR_VERSION, model.config.to_dict(), model.state_dict())


def load_var(path) -> VarTransformer:
    config, state = load_checkpoint(path, VAR_VERSION)
    model = VarTransformer(VarConfig.from_dict(config))
    model.load_state_dict(state)
    model.eval()
    return model
