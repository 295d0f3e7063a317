import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from timetok.core import (
    DomainError,
    GranularitySchedule,
    ReducerKind,
    gaussian_kernel,
    recoarsen,
    reduce,
    smooth,
)

SCHED = GranularitySchedule(series_length=128)


def test_gaussian_kernel_sigma_zero_identity():
    k = gaussian_kernel(0.0)
    assert k.shape == (1,)
    assert k[0] == 1.0


def test_gaussian_kernel_sigma_one():
    # Oracle: 7-tap kernel, radius floor(3*1)=3, weights exp(-i^2/2)/Z.
    k = gaussian_kernel(1.0)
    assert k.shape == (7,)
    raw = np.exp(-np.arange(-3, 4) ** 2 / 2.0)
    np.testing.assert_allclose(k, raw / raw.sum(), rtol=1e-12)
    assert k.sum() == pytest.approx(1.0)


def test_gaussian_kernel_symmetric_peak_centred():
    k = gaussian_kernel(2.7)
    np.testing.assert_allclose(k, k[::-1])
    assert np.argmax(k) == len(k) // 2


def test_gaussian_kernel_negative_sigma():
    with pytest.raises(DomainError):
        gaussian_kernel(-0.5)


def test_smooth_preserves_constant():
    x = np.full(50, 3.25)
    np.testing.assert_allclose(smooth(x, 4.0), x, rtol=1e-12)


def test_smooth_length_preserved_and_variance_reduced():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(256)
    y = smooth(x, 5.0)
    assert y.shape == x.shape
    assert y.std() < x.std()


def test_reduce_identity_at_finest():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(128)
    for kind in ReducerKind:
        np.testing.assert_allclose(reduce(x, 8, SCHED, kind=kind), x, rtol=1e-10)


def test_reduce_length_preserving_all_kinds():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(128)
    for kind in ReducerKind:
        for level in (1, 3, 5, 8):
            assert reduce(x, level, SCHED, kind=kind).shape == x.shape


def test_reduce_accepts_kind_by_name():
    x = np.random.default_rng(8).standard_normal(128)
    np.testing.assert_array_equal(
        reduce(x, 3, SCHED, kind="gaussian"), reduce(x, 3, SCHED)
    )


def test_reduce_unknown_kind():
    with pytest.raises(ValueError):
        reduce(np.zeros(128), 3, SCHED, kind="median")


def test_reduce_bad_level():
    with pytest.raises(DomainError):
        reduce(np.zeros(128), 0, SCHED)
    with pytest.raises(DomainError):
        reduce(np.zeros(128), 9, SCHED)


def test_recoarsen_composition_matches_direct():
    # Oracle: smoothing with sigma=4 after sigma=3 equals sigma=5 directly
    # (interior samples; edge renormalisation breaks exact composition).
    rng = np.random.default_rng(3)
    x = rng.standard_normal(400)
    via = smooth(smooth(x, 3.0), 4.0)
    direct = smooth(x, 5.0)
    interior = slice(40, -40)
    rmse = np.sqrt(np.mean((via[interior] - direct[interior]) ** 2))
    assert rmse < 1e-3


def test_recoarsen_identity_same_level():
    x = np.random.default_rng(4).standard_normal(128)
    np.testing.assert_array_equal(recoarsen(x, 5, 5, SCHED), x)


def test_recoarsen_rejects_refinement_direction():
    with pytest.raises(DomainError):
        recoarsen(np.zeros(128), 6, 2, SCHED)


def test_recoarsen_approximates_direct_reduction():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(128)
    re = recoarsen(reduce(x, 6, SCHED), 2, 6, SCHED)
    direct = reduce(x, 2, SCHED)
    interior = slice(20, -20)
    rmse = np.sqrt(np.mean((re[interior] - direct[interior]) ** 2))
    assert rmse < 5e-2


finite_series = arrays(
    np.float64,
    st.integers(min_value=16, max_value=200),
    elements=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
)


@settings(max_examples=40, deadline=None)
@given(finite_series, st.integers(min_value=1, max_value=8))
def test_reduce_properties(x, level):
    sched = GranularitySchedule(series_length=x.size)
    y = reduce(x, level, sched)
    assert y.shape == x.shape
    assert np.isfinite(y).all()
    # Convex combination of inputs: output stays within input range.
    assert y.min() >= x.min() - 1e-9
    assert y.max() <= x.max() + 1e-9


@settings(max_examples=40, deadline=None)
@given(finite_series, st.floats(min_value=0.0, max_value=20.0))
def test_smooth_mean_within_range(x, sigma):
    y = smooth(x, sigma)
    assert y.shape == x.shape
    assert np.isfinite(y).all()
    assert y.min() >= x.min() - 1e-9 and y.max() <= x.max() + 1e-9
