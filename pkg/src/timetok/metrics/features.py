"""Per-dataset feature extractor backing the Fréchet distance.

A small 1-D convolutional network trained on the real training split:
classifier backbone when labels exist, otherwise a contrastive objective
over jitter/scale augmentations. Penultimate activations are the features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .checkpoint_io import save_module, load_module


class ConvBackbone(nn.Module):
    def __init__(self, feature_dim: int = 64, n_classes: int = 0):
        super().__init__()
        self.feature_dim = feature_dim
        self.n_classes = n_classes
        self.net = nn.Sequential(
            nn.Conv1d(1, 32, 7, padding=3), nn.ReLU(),
            nn.Conv1d(32, 64, 5, padding=2, stride=2), nn.ReLU(),
            nn.Conv1d(64, 64, 3, padding=1, stride=2), nn.ReLU(),
            nn.AdaptiveAvgPool1d(1),
        )
        self.proj = nn.Linear(64, feature_dim)
        self.head = nn.Linear(feature_dim, max(n_classes, 1))

    def features(self, x: torch.Tensor) -> torch.Tensor:
        h = self.net(x.unsqueeze(1)).squeeze(-1)
        return self.proj(h)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(F.relu(self.features(x)))


@dataclass
class FeatureExtractor:
    model: ConvBackbone
    kind: str  # "classifier" or "contrastive"

    def __call__(self, values: np.ndarray, batch_size: int = 512) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        self.model.eval()
        out = []
        with torch.no_grad():
            for s in range(0, values.shape[0], batch_size):
                x = torch.from_numpy(values[s : s + batch_size]).float()
                out.append(self.model.features(x).numpy())
        return np.concatenate(out, axis=0).astype(np.float64)

    def save(self, path) -> None:
        save_module(path, self.model, {"kind": self.kind,
                                       "feature_dim": self.model.feature_dim,
                                       "n_classes": self.model.n_classes})

    @classmethod
    def load(cls, path) -> "FeatureExtractor":
        meta, state = load_module(path)
        model = ConvBackbone(meta["feature_dim"], meta["n_classes"])
        model.load_state_dict(state)
        return cls(model=model, kind=meta["kind"])


def _augment(x: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    scale = 1.0 + 0.2 * torch.randn(x.shape[0], 1, generator=generator)
    jitter = 0.1 * torch.randn(x.shape, generator=generator)
    shift = torch.randint(-4, 5, (1,), generator=generator).item()
    return torch.roll(x * scale + jitter, shift, dims=1)


def train_feature_extractor(
    values: np.ndarray,
    labels: np.ndarray | None = None,
    feature_dim: int = 64,
    steps: int = 300,
    batch_size: int = 64,
    lr: float = 1e-3,
    seed: int = 0,
) -> FeatureExtractor:
    torch.manual_seed(seed)
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    n_classes = 0
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        n_classes = int(labels.max()) + 1
    if n_classes < 2:
        labels = None  # single-class data degenerates to contrastive
        n_classes = 0
    kind = "classifier" if labels is not None else "contrastive"
    model = ConvBackbone(feature_dim, n_classes)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed + 1)
    x_all = torch.from_numpy(values).float()
    y_all = None if labels is None else torch.from_numpy(labels)
    model.train()
    for _ in range(steps):
        idx = torch.randint(0, n, (min(batch_size, n),), generator=generator)
        x = x_all[idx]
        if kind == "classifier":
            loss = F.cross_entropy(model(x), y_all[idx])
        else:
            # two augmented views; NT-Xent over the batch
            za = F.normalize(model.features(_augment(x, generator)), dim=1)
            zb = F.normalize(model.features(_augment(x, generator)), dim=1)
            logits = za @ zb.T / 0.2
            target = torch.arange(x.shape[0])
            loss = F.cross_entropy(logits, target)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return FeatureExtractor(model=model, kind=kind)
