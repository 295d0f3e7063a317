"""Small helper reusing the named-tensor archive format for metric models."""

from __future__ import annotations

from ..models.checkpoint import load_checkpoint, save_checkpoint

VERSION = "timetok-feat-v1"


def save_module(path, module, meta: dict) -> None:
    save_checkpoint(path, VERSION, meta, module.state_dict())


def load_module(path):
    return load_checkpoint(path, VERSION)
