import numpy as np
import pytest
import torch

from timetok.core import DomainError, GranularitySchedule
from timetok.models.flow import (
    DecoderConfig,
    VelocityNetwork,
    ctf_loss,
    decode_batch,
    interpolate,
    load_decoder,
    save_decoder,
    velocity_target,
)
from timetok.models.tokenizer import TokenizerConfig, TokenizerEncoder

SMALL = GranularitySchedule(
    n_levels=3, total_tokens=4, allocation="pow2", series_length=32
)


def small_decoder(seed=0):
    torch.manual_seed(seed)
    cfg = DecoderConfig(
        series_length=32, patch_count=8, hidden_dim=32, depth=1, heads=2,
        steps=8, schedule=SMALL,
    )
    return VelocityNetwork(cfg)


# --- path algebra ------------------------------------------------------------


def test_interpolate_endpoints():
    x = np.arange(8.0)
    eps = np.ones(8)
    np.testing.assert_array_equal(interpolate(x, eps, 0.0), eps)
    np.testing.assert_array_equal(interpolate(x, eps, 1.0), x)


def test_interpolate_midpoint():
    x = np.full(4, 2.0)
    eps = np.zeros(4)
    np.testing.assert_allclose(interpolate(x, eps, 0.5), np.full(4, 1.0))


def test_interpolate_rejects_bad_tau():
    with pytest.raises(DomainError):
        interpolate(np.zeros(4), np.zeros(4), 1.5)


def test_velocity_target_is_difference():
    x = np.array([3.0, 1.0])
    eps = np.array([1.0, 1.0])
    np.testing.assert_array_equal(velocity_target(x, eps), [2.0, 0.0])


def test_exact_velocity_integrates_to_target():
    # If the model returned the true constant velocity, S Euler steps of size
    # 1/S recover the target exactly from the noise.
    rng = np.random.default_rng(0)
    x, eps = rng.standard_normal(16), rng.standard_normal(16)
    v = velocity_target(x, eps)
    state = eps.copy()
    steps = 10
    for _ in range(steps):
        state = state + v / steps
    np.testing.assert_allclose(state, x, rtol=1e-10)


# --- velocity network ---------------------------------------------------------


def test_forward_shape():
    model = small_decoder()
    idx = torch.randint(0, model.config.vocab, (3, 4))
    v = model(torch.randn(3, 32), torch.rand(3), idx, torch.tensor([1, 2, 4]))
    assert v.shape == (3, 32)
    assert torch.isfinite(v).all()


def test_masked_tokens_do_not_leak():
    # With prefix_len = 1, token slots beyond the first must not affect output.
    model = small_decoder()
    model.eval()
    x = torch.randn(1, 32)
    tau = torch.tensor([0.3])
    a = torch.randint(0, model.config.vocab, (1, 4))
    b = a.clone()
    b[:, 1:] = torch.randint(0, model.config.vocab, (1, 3))
    plen = torch.tensor([1])
    with torch.no_grad():
        va = model(x, tau, a, plen)
        vb = model(x, tau, b, plen)
    torch.testing.assert_close(va, vb, rtol=1e-5, atol=1e-6)


def test_prefix_length_changes_output():
    model = small_decoder()
    model.eval()
    x = torch.randn(1, 32)
    tau = torch.tensor([0.3])
    idx = torch.randint(0, model.config.vocab, (1, 4))
    with torch.no_grad():
        v1 = model(x, tau, idx, torch.tensor([1]))
        v4 = model(x, tau, idx, torch.tensor([4]))
    assert not torch.allclose(v1, v4)


# --- decoding ----------------------------------------------------------------


def test_decode_batch_shape_and_determinism():
    model = small_decoder()
    idx = np.random.default_rng(1).integers(0, model.config.vocab, (5, 2))
    a = decode_batch(idx, 2, model, seed=7)
    b = decode_batch(idx, 2, model, seed=7)
    assert a.shape == (5, 32)
    np.testing.assert_array_equal(a, b)
    c = decode_batch(idx, 2, model, seed=8)
    assert not np.array_equal(a, c)


def test_decode_batch_per_row_seeds():
    model = small_decoder()
    idx = np.zeros((2, 2), dtype=np.int64)
    both = decode_batch(idx, 2, model, seed=np.array([3, 9]))
    solo = decode_batch(idx[:1], 2, model, seed=np.array([9]))
    np.testing.assert_allclose(both[1], solo[0], rtol=1e-5, atol=1e-6)


def test_decode_batch_validates_prefix_width():
    model = small_decoder()
    with pytest.raises(DomainError):
        decode_batch(np.zeros((2, 3), dtype=np.int64), 2, model)


def test_decode_batch_rejects_bad_level():
    model = small_decoder()
    with pytest.raises(DomainError):
        decode_batch(np.zeros((1, 4), dtype=np.int64), 4, model)


# --- training objective ---------------------------------------------------------


def test_ctf_loss_finite_and_backprops():
    torch.manual_seed(0)
    enc = TokenizerEncoder(
        TokenizerConfig(series_length=32, patch_count=8, hidden_dim=32,
                        depth=1, heads=2, schedule=SMALL)
    )
    dec = small_decoder()
    x = torch.randn(6, 32)
    targets = torch.randn(6, 3, 32)
    gen = torch.Generator().manual_seed(0)
    loss, per_elem = ctf_loss(x, targets, enc, dec, gen)
    assert torch.isfinite(loss)
    assert per_elem.shape == (6,)
    loss.backward()
    grads = [p.grad for p in enc.parameters() if p.grad is not None]
    assert grads, "no gradient reached the encoder"
    assert any(g.abs().sum() > 0 for g in grads)


def test_decoder_checkpoint_roundtrip(tmp_path):
    model = small_decoder()
    save_decoder(tmp_path / "dec.ckpt", model)
    loaded = load_decoder(tmp_path / "dec.ckpt")
    assert loaded.config == model.config
    idx = np.random.default_rng(2).integers(0, model.config.vocab, (2, 4))
    np.testing.assert_allclose(
        decode_batch(idx, 3, model, seed=1),
        decode_batch(idx, 3, loaded, seed=1),
        rtol=1e-5, atol=1e-6,
    )
