"""Training loops for the two stages.

Stage 1 first fits the tokenizer encoder with a prefix-masked linear
reconstruction objective (plus a codebook-entropy term; training the encoder
under the flow loss alone collapses token usage), then freezes it and trains
the velocity network under the coarse-to-fine flow-matching objective.
Stage 2 fits the block-autoregressive transformer on the frozen token corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import torch

from ..core.reducers import reduce as reduce_op
from ..core.schedule import GranularitySchedule
from .flow import DecoderConfig, VelocityNetwork, ctf_loss, save_decoder
from .tokenizer import TokenizerConfig, TokenizerEncoder, save_tokenizer
from .var import VarConfig, VarTransformer, save_var, var_loss


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; the last good checkpoint was retained."""


def reduce_all_levels(values: np.ndarray, schedule: GranularitySchedule) -> np.ndarray:
    """Precompute (N, L, T) level targets for a corpus."""
    n, t = values.shape
    out = np.empty((n, schedule.n_levels, t), dtype=np.float64)
    for l in range(1, schedule.n_levels + 1):
        for i in range(n):
            out[i, l - 1] = reduce_op(values[i], l, schedule)
    return out


def _save_train_state(path: Path, step: int, optimizer, generator) -> None:
    torch.save(
        {"step": step, "optimizer": optimizer.state_dict(), "rng": generator.get_state()},
        path,
    )


def eval_per_level(
    encoder: TokenizerEncoder,
    velocity: VelocityNetwork,
    probe_x: torch.Tensor,
    probe_targets: torch.Tensor,
    seed: int = 12345,
) -> list[float]:
    """Deterministic per-level flow loss on a fixed probe batch."""
    n_levels = velocity.config.schedule.n_levels
    losses = []
    was_training = velocity.training
    encoder.eval()
    velocity.eval()
    with torch.no_grad():
        for l in range(1, n_levels + 1):
            gen = torch.Generator().manual_seed(seed + l)
            levels = torch.full((probe_x.shape[0],), l, dtype=torch.long)
            loss, _ = ctf_loss(probe_x, probe_targets, encoder, velocity, gen, levels)
            losses.append(float(loss))
    if was_training:
        velocity.train()
    return losses


def pretrain_tokenizer(
    values: np.ndarray,  # (N, T) normalized series
    tokenizer_config: TokenizerConfig,
    steps: int = 600,
    batch_size: int = 64,
    lr: float = 2e-3,
    entropy_weight: float = 0.1,
    seed: int = 0,
    encoder: TokenizerEncoder | None = None,
    targets: torch.Tensor | None = None,
    level_weights: tuple | None = None,
) -> TokenizerEncoder:
    """Fit the encoder with a throwaway linear head reconstructing the
    level target from the prefix-masked quantized registers.

    The mask forces coarse structure into the leading registers; the entropy
    term keeps the codebook from collapsing.
    """
    from .fsq import fsq_entropy_aux

    torch.manual_seed(seed)
    if encoder is None:
        encoder = TokenizerEncoder(tokenizer_config)
    sched = tokenizer_config.schedule
    if targets is None:
        targets = torch.from_numpy(reduce_all_levels(values, sched)).float()
    x_all = torch.from_numpy(values).float()
    n, t = values.shape
    m, d = sched.total_tokens, len(tokenizer_config.fsq_levels)
    head = torch.nn.Linear(m * d, t)
    budgets = torch.tensor(sched.budgets, dtype=torch.long)
    optimizer = torch.optim.Adam(
        list(encoder.parameters()) + list(head.parameters()), lr=lr
    )
    generator = torch.Generator().manual_seed(seed + 2)
    weights = None
    if level_weights is not None:
        weights = torch.as_tensor(level_weights, dtype=torch.float32)
        if weights.numel() != sched.n_levels:
            raise TrainingDiverged("level_weights length != n_levels")
    encoder.train()
    for _ in range(steps):
        idx = torch.randint(0, n, (batch_size,), generator=generator)
        if weights is None:
            lv = torch.randint(1, sched.n_levels + 1, (batch_size,), generator=generator)
        else:
            lv = torch.multinomial(weights, batch_size, replacement=True, generator=generator) + 1
        quant, _, bounded = encoder(x_all[idx])
        keep = (torch.arange(m)[None, :] < budgets[lv - 1][:, None]).float()
        pred = head((quant * keep[:, :, None]).reshape(batch_size, -1))
        loss = ((pred - targets[idx, lv - 1]) ** 2).mean()
        loss = loss + entropy_weight * fsq_entropy_aux(bounded, tokenizer_config.fsq_levels)
        if not torch.isfinite(loss):
            raise TrainingDiverged("non-finite reconstruction loss")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    encoder.eval()
    return encoder


def train_stage1(
    values: np.ndarray,  # (N, T) normalized series
    tokenizer_config: TokenizerConfig,
    decoder_config: DecoderConfig,
    steps: int = 2000,
    batch_size: int = 64,
    lr: float = 1e-3,
    seed: int = 0,
    out_dir: str | Path | None = None,
    log_every: int = 200,
    log: Optional[Callable[[dict], None]] = None,
    resume_state: str | Path | None = None,
    encoder: TokenizerEncoder | None = None,
    velocity: VelocityNetwork | None = None,
    pretrain_steps: int = 600,
    pretrain_lr: float = 2e-3,
    pretrain_level_weights: tuple | None = None,
    coarse_steps: int = 0,
    coarse_lr: float = 5e-4,
    coarse_level_weights: tuple = (3.0, 3.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0),
) -> tuple[TokenizerEncoder, VelocityNetwork, list[dict]]:
    torch.manual_seed(seed)
    targets = torch.from_numpy(
        reduce_all_levels(values, decoder_config.schedule)
    ).float()
    if encoder is None:
        encoder = TokenizerEncoder(tokenizer_config)
        if resume_state is None and pretrain_steps > 0:
            encoder = pretrain_tokenizer(
                values, tokenizer_config, steps=pretrain_steps,
                batch_size=batch_size, lr=pretrain_lr, seed=seed,
                encoder=encoder, targets=targets,
                level_weights=pretrain_level_weights,
            )
    if velocity is None:
        velocity = VelocityNetwork(decoder_config)
    # the tokenizer is frozen from here on: flow-matching gradients degrade
    # the codebook rather than improving it
    encoder.eval()
    for p in encoder.parameters():
        p.requires_grad_(False)
    velocity.train()
    optimizer = torch.optim.Adam(velocity.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed + 1)
    start_step = 0
    if resume_state is not None:
        st = torch.load(resume_state, weights_only=False)
        optimizer.load_state_dict(st["optimizer"])
        generator.set_state(st["rng"])
        start_step = st["step"]

    x_all = torch.from_numpy(values).float()
    n = values.shape[0]
    n_probe = min(64, n)
    probe_x, probe_targets = x_all[:n_probe], targets[:n_probe]

    out_dir = Path(out_dir) if out_dir is not None else None
    history: list[dict] = []
    for step in range(start_step, steps):
        idx = torch.randint(0, n, (batch_size,), generator=generator)
        try:
            loss, _ = ctf_loss(x_all[idx], targets[idx], encoder, velocity, generator)
        except FloatingPointError as exc:
            raise TrainingDiverged(str(exc)) from exc
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if (step + 1) % log_every == 0 or step == 0 or step + 1 == steps:
            record = {
                "step": step + 1,
                "loss": float(loss.detach()),
                "per_level": eval_per_level(encoder, velocity, probe_x, probe_targets),
            }
            history.append(record)
            if log:
                log(record)
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
                save_tokenizer(out_dir / "tokenizer.ckpt", encoder)
                save_decoder(out_dir / "decoder.ckpt", velocity)
                _save_train_state(out_dir / "stage1_state.pt", step + 1, optimizer, generator)
                with open(out_dir / "stage1_history.json", "w") as fh:
                    json.dump(history, fh, indent=2)

    # Optional tail phase: oversample coarse levels at a reduced rate. Coarse
    # prefixes (1-4 tokens) see 8x fewer gradients per level under uniform
    # sampling relative to the information they must carry, and decode quality
    # at those levels is what level measurement leans on.
    if coarse_steps > 0:
        weights = torch.as_tensor(coarse_level_weights, dtype=torch.float32)
        if weights.numel() != decoder_config.schedule.n_levels:
            raise TrainingDiverged("coarse_level_weights length != n_levels")
        optimizer = torch.optim.Adam(velocity.parameters(), lr=coarse_lr)
        for step in range(steps, steps + coarse_steps):
            idx = torch.randint(0, n, (batch_size,), generator=generator)
            lv = torch.multinomial(
                weights, batch_size, replacement=True, generator=generator
            ) + 1
            try:
                loss, _ = ctf_loss(
                    x_all[idx], targets[idx], encoder, velocity, generator, levels=lv
                )
            except FloatingPointError as exc:
                raise TrainingDiverged(str(exc)) from exc
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            if (step + 1) % log_every == 0 or step + 1 == steps + coarse_steps:
                record = {
                    "step": step + 1,
                    "loss": float(loss.detach()),
                    "per_level": eval_per_level(encoder, velocity, probe_x, probe_targets),
                }
                history.append(record)
                if log:
                    log(record)
                if out_dir is not None:
                    save_tokenizer(out_dir / "tokenizer.ckpt", encoder)
                    save_decoder(out_dir / "decoder.ckpt", velocity)
                    with open(out_dir / "stage1_history.json", "w") as fh:
                        json.dump(history, fh, indent=2)

    encoder.eval()
    velocity.eval()
    return encoder, velocity, history


def eval_per_block(model: VarTransformer, probe_tokens: torch.Tensor, probe_labels) -> list[float]:
    model.eval()
    with torch.no_grad():
        _, per_block = var_loss(probe_tokens, model, probe_labels)
    model.train()
    return [float(v) for v in per_block]


def train_stage2(
    token_indices: np.ndarray,  # (N, M) from the frozen tokenizer
    config: VarConfig,
    class_labels: np.ndarray | None = None,
    steps: int = 2000,
    batch_size: int = 64,
    lr: float = 1e-3,
    seed: int = 0,
    out_dir: str | Path | None = None,
    log_every: int = 200,
    log: Optional[Callable[[dict], None]] = None,
    resume_state: str | Path | None = None,
    model: VarTransformer | None = None,
) -> tuple[VarTransformer, list[dict]]:
    torch.manual_seed(seed)
    if model is None:
        model = VarTransformer(config)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed + 1)
    start_step = 0
    if resume_state is not None:
        st = torch.load(resume_state, weights_only=False)
        optimizer.load_state_dict(st["optimizer"])
        generator.set_state(st["rng"])
        start_step = st["step"]

    tokens = torch.from_numpy(np.asarray(token_indices, dtype=np.int64))
    labels = None if class_labels is None else torch.from_numpy(
        np.asarray(class_labels, dtype=np.int64)
    )
    n = tokens.shape[0]
    n_probe = min(64, n)
    probe_tokens = tokens[:n_probe]
    probe_labels = None if labels is None else labels[:n_probe]

    out_dir = Path(out_dir) if out_dir is not None else None
    history: list[dict] = []
    for step in range(start_step, steps):
        idx = torch.randint(0, n, (batch_size,), generator=generator)
        batch_labels = None if labels is None else labels[idx]
        # drop the label for a fraction of batches so the null class is trained
        if batch_labels is not None and step % 5 == 0:
            batch_labels = None
        loss, _ = var_loss(tokens[idx], model, batch_labels)
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"non-finite VAR loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if (step + 1) % log_every == 0 or step == 0 or step + 1 == steps:
            record = {
                "step": step + 1,
                "loss": float(loss.detach()),
                "per_block": eval_per_block(model, probe_tokens, probe_labels),
            }
            history.append(record)
            if log:
                log(record)
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
                save_var(out_dir / "var.ckpt", model)
                _save_train_state(out_dir / "stage2_state.pt", step + 1, optimizer, generator)
                with open(out_dir / "stage2_history.json", "w") as fh:
                    json.dump(history, fh, indent=2)
    model.eval()
    return model, history
