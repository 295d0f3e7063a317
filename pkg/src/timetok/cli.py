"""`timetok` command-line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from .core.dataset import DatasetManifest, load_dataset
from .core.reducers import ReducerKind, reduce as reduce_op
from .core.schedule import GranularitySchedule
from .models.flow import DecoderConfig, decode_batch, load_decoder
from .models.tokenizer import TokenizerConfig, encode_batch, load_tokenizer
from .models.train import train_stage1, train_stage2
from .models.var import VarConfig, generate_tokens, load_var


@click.group()
def main():
    """Granularity-controllable time-series generation."""


# ---------------------------------------------------------------------- data


@main.group()
def data():
    """Dataset inspection and offline reduction."""


@data.command("inspect")
@click.argument("manifest_path", type=click.Path(exists=True))
def data_inspect(manifest_path):
    manifest = DatasetManifest.load(manifest_path)
    train, test = load_dataset(manifest)
    info = {
        "name": manifest.name,
        "train_size": len(train),
        "test_size": len(test),
        "series_length": manifest.series_length,
        "n_classes": manifest.n_classes,
        "normalization": manifest.normalization,
    }
    click.echo(yaml.safe_dump(info, sort_keys=False).strip())


@data.command("reduce")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--level", type=int, required=True)
@click.option("--kind", default="gaussian",
              type=click.Choice([k.value for k in ReducerKind]))
@click.option("--levels", "n_levels", default=8, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def data_reduce(manifest_path, level, kind, n_levels, out_dir):
    manifest = DatasetManifest.load(manifest_path)
    train, test = load_dataset(manifest)
    schedule = GranularitySchedule(
        n_levels=n_levels, series_length=manifest.series_length
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for split_name, split in (("train", train), ("test", test)):
        rows = np.stack([reduce_op(s.values, level, schedule, kind) for s in split])
        np.savetxt(out / f"{split_name}_level{level}_{kind}.csv", rows, delimiter=",")
    click.echo(f"wrote reduced splits to {out}")


# ------------------------------------------------------------------ training


def _schedule_from_opts(series_length, n_levels, total_tokens, allocation):
    return GranularitySchedule(
        n_levels=n_levels, total_tokens=total_tokens,
        allocation=allocation, series_length=series_length,
    )


def _load_train_values(manifest_path):
    manifest = DatasetManifest.load(manifest_path)
    train, _ = load_dataset(manifest)
    values = np.stack([s.values for s in train])
    labels = (
        np.array([s.class_label for s in train]) if manifest.n_classes > 0 else None
    )
    return manifest, values, labels


@main.command("train-tokenizer")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML with tokenizer/decoder/train overrides")
@click.option("--out", "out_dir", type=click.Path(), default="runs/stage1")
@click.option("--steps", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cli_train_tokenizer(manifest_path, config_path, out_dir, steps, seed):
    """Train the register tokenizer (reconstruction pretrain), then the flow decoder."""
    overrides = {}
    if config_path:
        with open(config_path) as fh:
            overrides = yaml.safe_load(fh) or {}
    manifest, values, _ = _load_train_values(manifest_path)
    schedule = _schedule_from_opts(
        manifest.series_length,
        overrides.get("n_levels", 8),
        overrides.get("total_tokens", 128),
        overrides.get("allocation", "pow2"),
    )
    tok_cfg = TokenizerConfig(
        series_length=manifest.series_length, schedule=schedule,
        **overrides.get("tokenizer", {}),
    )
    dec_cfg = DecoderConfig(
        series_length=manifest.series_length, schedule=schedule,
        **overrides.get("decoder", {}),
    )
    train_stage1(
        values, tok_cfg, dec_cfg, steps=steps, seed=seed, out_dir=out_dir,
        log=lambda r: click.echo(
            f"step {r['step']}: loss {r['loss']:.4f} per-level "
            + " ".join(f"{v:.3f}" for v in r["per_level"])
        ),
        **overrides.get("train", {}),
    )
    click.echo(f"checkpoints in {out_dir}")


@main.command("tokenize")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--ckpt", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), default="tokens.csv")
@click.option("--split", default="train", type=click.Choice(["train", "test"]))
def cli_tokenize(manifest_path, ckpt, out_path, split):
    """Emit one CSV row per series: series id followed by its M indices."""
    manifest = DatasetManifest.load(manifest_path)
    train, test = load_dataset(manifest)
    series = train if split == "train" else test
    encoder = load_tokenizer(ckpt)
    tokens = encode_batch(np.stack([s.values for s in series]), encoder)
    ids = np.arange(tokens.shape[0])[:, None]
    np.savetxt(out_path, np.hstack([ids, tokens]), fmt="%d", delimiter=",")
    click.echo(f"wrote {tokens.shape[0]} token rows to {out_path}")


@main.command("decode")
@click.option("--tokens", "tokens_path", type=click.Path(exists=True), required=True)
@click.option("--ckpt", type=click.Path(exists=True), required=True)
@click.option("--level", type=int, required=True)
@click.option("--steps", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="series.csv")
def cli_decode(tokens_path, ckpt, level, steps, seed, out_path):
    """Decode token prefixes (CSV rows: id, indices...) into series."""
    decoder = load_decoder(ckpt)
    raw = np.loadtxt(tokens_path, delimiter=",", dtype=np.int64, ndmin=2)
    indices = raw[:, 1:]
    n_l = decoder.config.schedule.tokens(level)
    series = decode_batch(indices[:, :n_l], level, decoder, steps=steps,
                          seed=np.arange(raw.shape[0]) + seed)
    np.savetxt(out_path, series, delimiter=",")
    click.echo(f"decoded {series.shape[0]} series at level {level} -> {out_path}")


@main.command("train-var")
@click.option("--tokens", "tokens_path", type=click.Path(exists=True), required=True,
              help="token CSV from `timetok tokenize`")
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="runs/stage2")
@click.option("--steps", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cli_train_var(tokens_path, labels_path, config_path, out_dir, steps, seed):
    """Train the block-autoregressive transformer on a token corpus."""
    overrides = {}
    if config_path:
        with open(config_path) as fh:
            overrides = yaml.safe_load(fh) or {}
    raw = np.loadtxt(tokens_path, delimiter=",", dtype=np.int64, ndmin=2)
    tokens = raw[:, 1:]
    labels = None
    n_classes = 0
    if labels_path:
        labels = np.loadtxt(labels_path, dtype=np.int64)
        n_classes = int(labels.max()) + 1
    schedule = _schedule_from_opts(
        overrides.get("series_length", 128),
        overrides.get("n_levels", 8),
        tokens.shape[1],
        overrides.get("allocation", "pow2"),
    )
    cfg = VarConfig(schedule=schedule, n_classes=n_classes, **overrides.get("var", {}))
    train_stage2(
        tokens, cfg, class_labels=labels, steps=steps, seed=seed, out_dir=out_dir,
        log=lambda r: click.echo(f"step {r['step']}: nll {r['loss']:.2f}"),
        **overrides.get("train", {}),
    )
    click.echo(f"checkpoints in {out_dir}")


# ----------------------------------------------------------------- sampling


@main.command("sample")
@click.option("--ckpt", type=click.Path(exists=True), required=True, help="var checkpoint")
@click.option("--level", type=int, required=True)
@click.option("--n", default=16, show_default=True)
@click.option("--class", "class_label", type=int, default=None)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--top-k", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="tokens.csv")
def cli_sample(ckpt, level, n, class_label, temperature, top_k, seed, out_path):
    """Sample token prefixes at a granularity level."""
    var = load_var(ckpt)
    tokens = generate_tokens(
        None, 0, level, var, temperature=temperature, top_k=top_k,
        class_labels=class_label, seed=seed, batch=n,
    )
    ids = np.arange(n)[:, None]
    np.savetxt(out_path, np.hstack([ids, tokens]), fmt="%d", delimiter=",")
    click.echo(f"sampled {n} level-{level} token rows -> {out_path}")


def _load_bundle(model_dir):
    from .pipeline.bundle import ModelBundle

    return ModelBundle.load(model_dir)


def _write_provenance(out_dir: Path, payload: dict) -> None:
    with open(out_dir / "provenance.yaml", "w") as fh:
        yaml.safe_dump(payload, fh, sort_keys=False)


@main.command("refine")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True,
              help="CSV, one condition series per row")
@click.option("--models", "model_dir", type=click.Path(exists=True), required=True)
@click.option("--target-level", type=int, required=True)
@click.option("--source-level", type=int, default=None,
              help="override the automatic level measurement")
@click.option("--k", default=5, show_default=True)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--top-k", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--steps", default=50, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def cli_refine(in_path, model_dir, target_level, source_level, k, temperature,
               top_k, seed, steps, out_dir):
    """Refine coarse conditions to a finer granularity level."""
    from .pipeline.gctsg import RefinementJob, refine

    bundle = _load_bundle(model_dir)
    conditions = np.loadtxt(in_path, delimiter=",", ndmin=2)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    provenance = {"model_dir": str(model_dir), "target_level": target_level,
                  "seed": seed, "steps": steps, "conditions": []}
    for idx, cond in enumerate(conditions):
        job = RefinementJob(
            condition=cond, target_level=target_level, source_level=source_level,
            n_samples=k, temperature=temperature, top_k=top_k,
            seed=seed + 1000 * idx, steps=steps,
        )
        result = refine(job, bundle)
        np.savetxt(out / f"condition{idx}_samples.csv", result.samples, delimiter=",")
        provenance["conditions"].append({
            "index": idx,
            "source_level_used": result.source_level,
            "token_prefix_length": result.prefix_length,
            "sample_seeds": list(result.seeds),
        })
    _write_provenance(out, provenance)
    click.echo(f"wrote refinements for {len(conditions)} conditions to {out}")


@main.command("generate")
@click.option("--models", "model_dir", type=click.Path(exists=True), required=True)
@click.option("--level", type=int, required=True)
@click.option("--n", default=16, show_default=True)
@click.option("--class", "class_label", type=int, default=None)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--top-k", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--steps", default=50, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def cli_generate(model_dir, level, n, class_label, temperature, top_k, seed, steps, out_dir):
    """Unconditional generation at a granularity level."""
    from .pipeline.gctsg import generate_unconditional

    bundle = _load_bundle(model_dir)
    series = generate_unconditional(
        level, n, bundle, class_label=class_label, temperature=temperature,
        top_k=top_k, seed=seed, steps=steps,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "series.csv", series, delimiter=",")
    _write_provenance(out, {"model_dir": str(model_dir), "level": level, "n": n,
                            "class": class_label, "seed": seed, "steps": steps})
    click.echo(f"wrote {n} level-{level} series to {out}")


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="runs/pipeline")
@click.option("--dry-run", is_flag=True)
def cli_run(config_path, out_dir, dry_run):
    """Full pipeline: data, stage-1, tokenize, stage-2, evaluation sweep."""
    from .pipeline.run import StageFailure, run_pipeline

    try:
        run_pipeline(config_path, out_dir, dry_run=dry_run, log=click.echo)
    except StageFailure as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)


@main.command("evaluate")
@click.option("--run", "run_dir", type=click.Path(exists=True), required=True)
@click.option("--metrics", default="crps,ccons,fid,tstr,entropy", show_default=True)
def cli_evaluate(run_dir, metrics):
    """Summarize the metric CSVs of a finished run directory."""
    run_dir = Path(run_dir)
    wanted = set(metrics.split(","))
    shown = False
    if {"crps", "ccons"} & wanted and (run_dir / "gctsg_pairs.csv").exists():
        click.echo((run_dir / "gctsg_pairs.csv").read_text().strip())
        shown = True
    if "fid" in wanted and (run_dir / "unconditional_levels.csv").exists():
        click.echo((run_dir / "unconditional_levels.csv").read_text().strip())
        shown = True
    if "entropy" in wanted and (run_dir / "token_entropy.csv").exists():
        click.echo((run_dir / "token_entropy.csv").read_text().strip())
        shown = True
    if "tstr" in wanted and (run_dir / "tstr.csv").exists():
        click.echo((run_dir / "tstr.csv").read_text().strip())
        shown = True
    if not shown:
        click.echo("no metric tables found in run directory", err=True)
        sys.exit(1)


@main.command("serve")
@click.option("--registry", "registry_dir", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--cap", default=1024, show_default=True, help="max n per generate request")
def cli_serve(registry_dir, host, port, cap):
    """Serve the JSON inference API over a model registry directory."""
    import uvicorn

    from .service.app import ModelRegistry, create_app

    app = create_app(ModelRegistry(registry_dir), generation_cap=cap)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
