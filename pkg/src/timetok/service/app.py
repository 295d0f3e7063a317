"""JSON inference service: level measurement, refinement, generation.

Model bundles are loaded once from a registry directory (one subdirectory
per model holding tokenizer/decoder/var checkpoints); weights are never
mutated after load and every response carries enough provenance to
reproduce it from the CLI.
"""

from __future__ import annotations

import math
import os
import secrets
import threading
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from ..core.series import DomainError
from ..pipeline.bundle import ModelBundle
from ..pipeline.gctsg import (
    LevelConflictError,
    RefinementJob,
    generate_unconditional,
    measure_level,
    refine,
)


class ModelRegistry:
    """Read-mostly map of model id -> loaded bundle."""

    def __init__(self, root: str | Path | None = None):
        self._lock = threading.Lock()
        self._models: dict[str, ModelBundle] = {}
        if root is not None:
            self.load_directory(root)

    def load_directory(self, root: str | Path) -> None:
        root = Path(root)
        loaded = {}
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            if (sub / "tokenizer.ckpt").exists():
                loaded[sub.name] = ModelBundle.load(sub)
        with self._lock:
            self._models = loaded

    def register(self, model_id: str, bundle: ModelBundle) -> None:
        with self._lock:
            self._models = {**self._models, model_id: bundle}

    def get(self, model_id: str) -> ModelBundle:
        bundle = self._models.get(model_id)
        if bundle is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        return bundle

    def entries(self) -> list[dict]:
        out = []
        for model_id, b in self._models.items():
            out.append(
                {
                    "model_id": model_id,
                    "series_length": b.series_length,
                    "n_levels": b.schedule.n_levels,
                    "total_tokens": b.schedule.total_tokens,
                    "allocation": b.schedule.allocation,
                    "n_classes": b.n_classes,
                }
            )
        return out


class MeasureRequest(BaseModel):
    model_id: str
    series: list[float]


class RefineRequest(BaseModel):
    model_id: str
    series: list[float]
    target_level: int
    source_level: Optional[int] = None
    k: int = Field(default=5, ge=1)
    temperature: float = 1.0
    top_k: int = 64
    class_label: Optional[int] = None
    seed: Optional[int] = None


class GenerateRequest(BaseModel):
    model_id: str
    level: int
    n: int = Field(ge=1)
    class_label: Optional[int] = None
    temperature: float = 1.0
    top_k: int = 64
    seed: Optional[int] = None


def _check_series(values: list[float], expected_len: int) -> np.ndarray:
    if len(values) != expected_len:
        raise HTTPException(
            status_code=400,
            detail=f"series length {len(values)} != model length {expected_len}",
        )
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise HTTPException(status_code=422, detail="series contains non-finite values")
    return arr


def create_app(registry: ModelRegistry | None = None, generation_cap: int | None = None) -> FastAPI:
    if registry is None:
        root = os.environ.get("TIMETOK_REGISTRY")
        registry = ModelRegistry(root if root else None)
    cap = generation_cap or int(os.environ.get("TIMETOK_GENERATION_CAP", "1024"))
    app = FastAPI(title="timetok inference service")
    app.state.registry = registry

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.get("/v1/models")
    def models():
        return {"models": registry.entries()}

    @app.post("/v1/measure")
    def measure(req: MeasureRequest):
        bundle = registry.get(req.model_id)
        series = _check_series(req.series, bundle.series_length)
        m = measure_level(series, bundle)
        return {
            "model_id": req.model_id,
            "distances": list(m.distances),
            "improvements": list(m.improvements),
            "level": m.level,
            "threshold": m.threshold,
        }

    @app.post("/v1/refine")
    def refine_endpoint(req: RefineRequest):
        bundle = registry.get(req.model_id)
        series = _check_series(req.series, bundle.series_length)
        if not 1 <= req.target_level <= bundle.schedule.n_levels:
            raise HTTPException(status_code=400, detail="target_level out of range")
        if req.class_label is not None and not 0 <= req.class_label < max(bundle.n_classes, 1):
            raise HTTPException(status_code=400, detail="invalid class label")
        seed = req.seed if req.seed is not None else secrets.randbelow(2**31)
        job = RefinementJob(
            condition=series,
            target_level=req.target_level,
            source_level=req.source_level,
            n_samples=req.k,
            temperature=req.temperature,
            top_k=req.top_k,
            class_label=req.class_label,
            seed=seed,
        )
        try:
            result = refine(job, bundle)
        except LevelConflictError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except DomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "model_id": req.model_id,
            "samples": result.samples.tolist(),
            "source_level_used": result.source_level,
            "target_level": result.target_level,
            "token_prefix_length": result.prefix_length,
            "seed": seed,
            "sample_seeds": list(result.seeds),
        }

    @app.post("/v1/generate")
    def generate(req: GenerateRequest):
        bundle = registry.get(req.model_id)
        if req.n > cap:
            raise HTTPException(status_code=400, detail=f"n exceeds server cap {cap}")
        if not 1 <= req.level <= bundle.schedule.n_levels:
            raise HTTPException(status_code=400, detail="level out of range")
        if req.class_label is not None and not 0 <= req.class_label < max(bundle.n_classes, 1):
            raise HTTPException(status_code=400, detail="invalid class label")
        seed = req.seed if req.seed is not None else secrets.randbelow(2**31)
        try:
            samples = generate_unconditional(
                req.level, req.n, bundle,
                class_label=req.class_label,
                temperature=req.temperature, top_k=req.top_k, seed=seed,
            )
        except DomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "model_id": req.model_id,
            "level": req.level,
            "samples": samples.tolist(),
            "seed": seed,
        }

    return app
