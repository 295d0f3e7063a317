import numpy as np
import pytest
import torch

from timetok.core import DomainError, GranularitySchedule
from timetok.models.var import (
    BlockLayout,
    VarConfig,
    VarTransformer,
    block_causal_mask,
    generate_tokens,
    load_var,
    save_var,
    var_loss,
)

SCHED = GranularitySchedule(series_length=128)
SMALL = GranularitySchedule(
    n_levels=3, total_tokens=4, allocation="pow2", series_length=32
)


def small_model(n_classes=0, seed=0):
    torch.manual_seed(seed)
    cfg = VarConfig(hidden_dim=32, depth=1, heads=2, n_classes=n_classes, schedule=SMALL)
    return VarTransformer(cfg)


# --- layout and mask --------------------------------------------------------


def test_layout_from_schedule():
    lay = BlockLayout.from_schedule(SCHED)
    assert lay.boundaries == (0, 1, 2, 4, 8, 16, 32, 64, 128)
    assert lay.total == 128
    assert lay.n_blocks == 8


def test_layout_level_ids():
    lay = BlockLayout.from_schedule(SMALL)
    np.testing.assert_array_equal(lay.level_ids, [1, 2, 3, 3])


def test_layout_rejects_nonincreasing():
    with pytest.raises(DomainError):
        BlockLayout(boundaries=(0, 2, 2))


def test_block_causal_mask_semantics():
    lay = BlockLayout.from_schedule(SMALL)
    mask = block_causal_mask(lay)
    lev = lay.level_ids
    for p in range(lay.total):
        for q in range(lay.total):
            assert mask[p, q] == (lev[q] <= lev[p])
    # every position attends within its own block and to all coarser blocks
    assert mask[0, 0]
    assert mask[3, 0] and mask[3, 1] and mask[3, 2]
    assert not mask[0, 1]  # coarse cannot see fine


def test_mask_allows_strictly_more_with_level():
    lay = BlockLayout.from_schedule(SCHED)
    mask = block_causal_mask(lay)
    counts = mask.sum(axis=1)
    # visibility is non-decreasing with position (blocks are ordered coarse->fine)
    assert (np.diff(counts) >= 0).all()


# --- transformer -------------------------------------------------------------


def test_teacher_logits_shape_and_finite():
    model = small_model()
    idx = torch.randint(0, model.config.vocab, (3, 4))
    logits = model.forward_teacher(idx)
    assert logits.shape == (3, 4, model.config.vocab)
    assert torch.isfinite(logits).all()


def test_coarse_logits_ignore_fine_tokens():
    # Block-causal: block-1 logits cannot depend on later-block token ids.
    model = small_model()
    model.eval()
    a = torch.randint(0, model.config.vocab, (2, 4))
    b = a.clone()
    b[:, 1:] = torch.randint(0, model.config.vocab, (2, 3))
    with torch.no_grad():
        la = model.forward_teacher(a)
        lb = model.forward_teacher(b)
    torch.testing.assert_close(la[:, :1], lb[:, :1], rtol=1e-4, atol=1e-5)


def test_forward_prefix_matches_teacher():
    # The truncated prefix pass must reproduce the teacher logits for the
    # target block.
    model = small_model()
    model.eval()
    idx = torch.randint(0, model.config.vocab, (2, 4))
    with torch.no_grad():
        teacher = model.forward_teacher(idx)
        pref = model.forward_prefix(idx[:, :2], 3)
    torch.testing.assert_close(pref, teacher[:, 2:4], rtol=1e-4, atol=1e-5)


def test_class_conditioning_changes_logits():
    model = small_model(n_classes=2)
    # AdaLN modulations are zero-initialized, so conditioning is a no-op at
    # init by design; perturb them to verify the class pathway is wired up.
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "ada" in name.lower() or "mod" in name.lower():
                p.add_(torch.randn_like(p) * 0.1)
    model.eval()
    idx = torch.randint(0, model.config.vocab, (1, 4))
    with torch.no_grad():
        l0 = model.forward_teacher(idx, torch.tensor([0]))
        l1 = model.forward_teacher(idx, torch.tensor([1]))
        lnull = model.forward_teacher(idx, None)
    assert not torch.allclose(l0, l1)
    assert not torch.allclose(l0, lnull)


def test_var_loss_uniform_at_init_scale():
    model = small_model()
    idx = torch.randint(0, model.config.vocab, (8, 4))
    loss, per_block = var_loss(idx, model)
    # NLL summed over 7 positions; near-uniform logits at init give ~7*ln(4096)
    assert float(loss) == pytest.approx(4 * np.log(4096), rel=0.15)
    assert len(per_block) == 3


# --- sampling ----------------------------------------------------------------


def test_generate_unconditional_shape():
    model = small_model()
    out = generate_tokens(None, 0, 3, model, seed=5, batch=4)
    assert out.shape == (4, 4)
    assert out.dtype == np.int64
    assert (out >= 0).all() and (out < model.config.vocab).all()


def test_generate_deterministic_given_seed():
    model = small_model()
    a = generate_tokens(None, 0, 3, model, seed=11, batch=2)
    b = generate_tokens(None, 0, 3, model, seed=11, batch=2)
    np.testing.assert_array_equal(a, b)
    c = generate_tokens(None, 0, 3, model, seed=12, batch=2)
    assert not np.array_equal(a, c)


def test_generate_preserves_prefix():
    model = small_model()
    pre = np.array([[7, 9]])
    out = generate_tokens(pre, 2, 3, model, seed=0)
    np.testing.assert_array_equal(out[:, :2], pre)
    assert out.shape == (1, 4)


def test_generate_zero_temperature_is_greedy_and_deterministic():
    model = small_model()
    a = generate_tokens(None, 0, 3, model, temperature=0.0, seed=1)
    b = generate_tokens(None, 0, 3, model, temperature=0.0, seed=999)
    np.testing.assert_array_equal(a, b)


def test_generate_rejects_bad_levels():
    model = small_model()
    with pytest.raises(DomainError):
        generate_tokens(None, 2, 2, model)
    with pytest.raises(DomainError):
        generate_tokens(None, 3, 1, model)


def test_generate_rejects_bad_prefix_width():
    model = small_model()
    with pytest.raises(DomainError):
        generate_tokens(np.zeros((1, 2), dtype=np.int64), 1, 3, model)


def test_var_checkpoint_roundtrip(tmp_path):
    model = small_model(n_classes=2)
    save_var(tmp_path / "var.ckpt", model)
    loaded = load_var(tmp_path / "var.ckpt")
    assert loaded.config == model.config
    a = generate_tokens(None, 0, 3, model, seed=3, class_labels=torch.tensor([0]))
    b = generate_tokens(None, 0, 3, loaded, seed=3, class_labels=torch.tensor([0]))
    np.testing.assert_array_equal(a, b)
