"""Self-describing checkpoint archives.

A checkpoint is a zip file containing:
  manifest.json  -- version string plus a listing of every tensor
                    (name, shape, dtype)
  config.json    -- the model's config, round-trippable
  tensors/<name>.npy
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np
import torch


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str | Path, version: str, config: dict, state_dict: dict) -> None:
    tensors = {k: v.detach().cpu().numpy() for k, v in state_dict.items()}
    manifest = {
        "version": version,
        "tensors": [
            {"name": k, "shape": list(v.shape), "dtype": str(v.dtype)}
            for k, v in tensors.items()
        ],
    }
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=2))
        zf.writestr("config.json", json.dumps(config, indent=2))
        for name, arr in tensors.items():
            buf = io.BytesIO()
            np.save(buf, arr)
            zf.writestr(f"tensors/{name}.npy", buf.getvalue())


def load_checkpoint(path: str | Path, expect_version: str | None = None) -> tuple[dict, dict]:
    """Return (config, state_dict of torch tensors)."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        zf = zipfile.ZipFile(path)
    except zipfile.BadZipFile as exc:
        raise CheckpointError(f"{path}: not a checkpoint archive") from exc
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
            config = json.loads(zf.read("config.json"))
        except KeyError as exc:
            raise CheckpointError(f"{path}: missing archive member {exc}") from exc
        if expect_version and manifest.get("version") != expect_version:
            raise CheckpointError(
                f"{path}: version {manifest.get('version')!r}, expected {expect_version!r}"
            )
        state = {}
        for entry in manifest["tensors"]:
            arr = np.load(io.BytesIO(zf.read(f"tensors/{entry['name']}.npy")))
            if list(arr.shape) != entry["shape"]:
                raise CheckpointError(f"tensor {entry['name']}: shape mismatch")
            state[entry["name"]] = torch.from_numpy(arr)
    return config, state
