"""Dataset manifests and ingestion.

Supported file formats: UCR-style tab-separated (class label in the first
column) and headerless CSV. Manifests are YAML key/value files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .series import DomainError, NormalizationStats, TimeSeries


class IngestionError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    train_path: str
    test_path: str
    series_length: int
    n_classes: int = 0  # 0 -> forecasting-style (unlabeled, windowed)
    file_format: str = "ucr-tsv"  # or "csv"
    normalization: str = "zscore"  # or "none"
    window_stride: int = 1
    dfa_levels_path: Optional[str] = None
    base_dir: str = "."

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        with open(path) as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise IngestionError(f"manifest {path} is not a key/value mapping")
        raw.setdefault("base_dir", str(path.parent))
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(raw) - known
        if unknown:
            raise IngestionError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**raw)

    def save(self, path: str | Path) -> None:
        d = {k: v for k, v in self.__dict__.items() if k != "base_dir"}
        with open(path, "w") as fh:
            yaml.safe_dump(d, fh, sort_keys=False)


def _read_table(path: Path, fmt: str) -> tuple[np.ndarray, Optional[np.ndarray]]:
    if not path.exists():
        raise IngestionError(f"dataset file not found: {path}")
    delim = "\t" if fmt == "ucr-tsv" else ","
    try:
        raw = np.loadtxt(path, delimiter=delim, ndmin=2)
    except ValueError as exc:
        raise IngestionError(f"failed to parse {path}: {exc}") from exc
    if raw.size == 0:
        raise IngestionError(f"empty dataset file: {path}")
    if not np.all(np.isfinite(raw)):
        rows, cols = np.where(~np.isfinite(raw))
        raise IngestionError(
            f"non-finite value at row {rows[0]}, column {cols[0]} in {path}"
        )
    if fmt == "ucr-tsv":
        labels = raw[:, 0].astype(np.int64)
        return raw[:, 1:], labels
    return raw, None


def _relabel(labels: np.ndarray) -> np.ndarray:
    # UCR labels can be 1-based or {-1, 1}; map to 0..C-1 in sorted order
    uniq = np.unique(labels)
    lut = {v: i for i, v in enumerate(uniq.tolist())}
    return np.array([lut[v] for v in labels.tolist()], dtype=np.int64)


def _window(values_rows: np.ndarray, t_len: int, stride: int) -> np.ndarray:
    out = []
    for row in values_rows:
        if row.shape[0] < t_len:
            raise IngestionError(
                f"row of length {row.shape[0]} shorter than window {t_len}"
            )
        for start in range(0, row.shape[0] - t_len + 1, stride):
            out.append(row[start : start + t_len])
    return np.stack(out)


def load_dataset(manifest: DatasetManifest) -> tuple[list[TimeSeries], list[TimeSeries]]:
    """Load the train and test splits described by a manifest.

    Classification-style datasets load one series per row; forecasting-style
    datasets slide windows of the manifest length over each row. Z-scoring
    uses training-split statistics and is recorded on every series.
    """
    splits = []
    stats: Optional[NormalizationStats] = None
    for which in ("train", "test"):
        path = manifest.resolve(getattr(manifest, f"{which}_path"))
        rows, labels = _read_table(path, manifest.file_format)
        if manifest.n_classes > 0:
            if labels is None:
                raise IngestionError("classification dataset requires a label column")
            if rows.shape[1] != manifest.series_length:
                raise IngestionError(
                    f"{path}: row length {rows.shape[1]} != manifest length "
                    f"{manifest.series_length}"
                )
            labels = _relabel(labels)
            n_seen = int(labels.max()) + 1
            if n_seen > manifest.n_classes:
                raise IngestionError(
                    f"{path}: found {n_seen} classes, manifest says {manifest.n_classes}"
                )
        else:
            rows = _window(rows, manifest.series_length, manifest.window_stride)
            labels = None
        if which == "train" and manifest.normalization == "zscore":
            stats = NormalizationStats.from_values(rows)
        if stats is not None:
            rows = stats.normalize(rows)
        split = [
            TimeSeries(
                values=rows[i],
                class_label=None if labels is None else int(labels[i]),
                norm=stats,
            )
            for i in range(rows.shape[0])
        ]
        splits.append(split)
    return splits[0], splits[1]
