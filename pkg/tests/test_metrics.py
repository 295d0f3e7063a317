import numpy as np
import pytest

from timetok.core import DomainError, GranularitySchedule, UnsupportedOperatorError, reduce
from timetok.metrics import (
    SampleFan,
    c_cons,
    crps_point,
    crps_sum,
    fid,
    token_entropy,
)
from timetok.metrics.entropy import volatility_vs_entropy_report
from timetok.metrics.tstr import macro_f1

SCHED = GranularitySchedule(series_length=128)


# --- CRPS ---------------------------------------------------------------


def test_crps_point_two_samples():
    # Oracle: samples {0, 2}, truth 1:
    # mean |x-1| = 1, half mean pairwise |xi-xj| = (0+2+2+0)/4/2 = 0.5
    assert crps_point([0.0, 2.0], 1.0) == pytest.approx(0.5)


def test_crps_point_single_sample_is_mae():
    assert crps_point([3.0], 1.0) == pytest.approx(2.0)


def test_crps_perfect_forecast_zero():
    assert crps_point([1.0, 1.0, 1.0], 1.0) == pytest.approx(0.0)


def test_crps_gaussian_closed_form():
    # Oracle: CRPS of N(0,1) forecast at truth 0 is sigma*(2/sqrt(2pi) - 1/sqrt(pi)).
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(40_000)
    expect = 2 / np.sqrt(2 * np.pi) - 1 / np.sqrt(np.pi)
    assert crps_point(samples, 0.0) == pytest.approx(expect, abs=5e-3)


def test_crps_sum_is_sum_of_points():
    rng = np.random.default_rng(1)
    fan = SampleFan(rng.standard_normal((6, 10)), rng.standard_normal(10))
    total = sum(crps_point(fan.samples[:, t], fan.truth[t]) for t in range(10))
    assert crps_sum(fan) == pytest.approx(total)


def test_sample_fan_validation():
    with pytest.raises(DomainError):
        SampleFan(np.zeros((3, 5)), np.zeros(6))


# --- coarse consistency ---------------------------------------------------


def test_c_cons_zero_for_exact_recoarsening():
    from timetok.core import recoarsen

    rng = np.random.default_rng(2)
    x = rng.standard_normal(128)
    fine = reduce(x, 6, SCHED)
    cond = recoarsen(fine, 2, 6, SCHED)
    assert c_cons(fine, cond, 2, 6, SCHED) == pytest.approx(0.0, abs=1e-12)


def test_c_cons_positive_for_mismatch():
    rng = np.random.default_rng(3)
    fine = reduce(rng.standard_normal(128), 6, SCHED)
    cond = reduce(rng.standard_normal(128), 2, SCHED)
    assert c_cons(fine, cond, 2, 6, SCHED) > 0.1


def test_c_cons_gaussian_only():
    with pytest.raises(UnsupportedOperatorError):
        c_cons(np.zeros(128), np.zeros(128), 2, 6, SCHED, kind="wavelet")


# --- FID -------------------------------------------------------------------


def test_fid_identical_sets_zero():
    rng = np.random.default_rng(4)
    feats = rng.standard_normal((300, 8))
    assert fid(feats, feats) == pytest.approx(0.0, abs=1e-8)


def test_fid_univariate_gaussians():
    # Oracle: FID between N(0,1) and N(1,1) in 1-D is (mu diff)^2 = 1.
    rng = np.random.default_rng(5)
    a = rng.standard_normal((100_000, 1))
    b = rng.standard_normal((100_000, 1)) + 1.0
    assert fid(a, b) == pytest.approx(1.0, abs=0.02)


def test_fid_mean_and_cov_terms():
    # Closed form for diagonal Gaussians:
    # ||mu1-mu2||^2 + sum(s1 + s2 - 2*sqrt(s1*s2))
    rng = np.random.default_rng(6)
    a = rng.standard_normal((200_000, 2))
    b = rng.standard_normal((200_000, 2)) * 2.0
    expect = 2 * (1 + 4 - 2 * 2.0)  # per-dim 1+4-2*sqrt(4), two dims
    assert fid(a, b) == pytest.approx(expect, rel=0.05)


def test_fid_symmetric():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((500, 4))
    b = rng.standard_normal((500, 4)) + 0.3
    assert fid(a, b) == pytest.approx(fid(b, a), rel=1e-6)


# --- token entropy ---------------------------------------------------------


def test_token_entropy_uniform():
    idx = np.arange(4096).reshape(32, 128)
    assert token_entropy(idx) == pytest.approx(np.log(4096))


def test_token_entropy_degenerate():
    assert token_entropy(np.zeros((10, 16), dtype=int)) == 0.0


def test_token_entropy_positions_slice():
    idx = np.zeros((8, 16), dtype=int)
    idx[:, 8:] = np.arange(8 * 8).reshape(8, 8)
    assert token_entropy(idx, positions=slice(0, 8)) == 0.0
    assert token_entropy(idx, positions=slice(8, 16)) == pytest.approx(np.log(64))


def test_volatility_entropy_report_shape():
    rng = np.random.default_rng(8)
    series = rng.standard_normal((60, 128))
    tokens = rng.integers(0, 4096, size=(60, 128))
    rep = volatility_vs_entropy_report(series, tokens, n_groups=5)
    assert len(rep.rows) == 60  # one row per series
    assert {r["group"] for r in rep.rows} == set(range(5))
    assert np.isfinite(rep.spearman_rho)


# --- macro F1 ----------------------------------------------------------------


def test_macro_f1_perfect():
    y = np.array([0, 1, 2, 0, 1, 2])
    assert macro_f1(y, y, 3) == pytest.approx(1.0)


def test_macro_f1_known_value():
    # class 0: precision 1, recall 0.5 -> F1 = 2/3; class 1: p=0.5, r=1 -> 2/3
    y_true = np.array([0, 0, 1])
    y_pred = np.array([0, 1, 1])
    assert macro_f1(y_true, y_pred, 2) == pytest.approx(2 / 3)
