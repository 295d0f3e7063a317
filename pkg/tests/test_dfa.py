import numpy as np
import pytest

from timetok.core import DomainError, assign_level_dfa, dfa_exponent, turning_point_rate


def test_dfa_white_noise_exponent():
    # Oracle: order-1 DFA on iid Gaussian noise gives alpha ~= 0.5.
    rng = np.random.default_rng(11)
    alphas = [dfa_exponent(rng.standard_normal(4096)) for _ in range(5)]
    assert np.mean(alphas) == pytest.approx(0.5, abs=0.08)


def test_dfa_integrated_noise_exponent():
    # Oracle: random walk (integrated white noise) gives alpha ~= 1.5.
    rng = np.random.default_rng(12)
    alphas = [dfa_exponent(np.cumsum(rng.standard_normal(4096))) for _ in range(5)]
    assert np.mean(alphas) == pytest.approx(1.5, abs=0.12)


def test_dfa_rejects_short_series():
    with pytest.raises(DomainError):
        dfa_exponent(np.zeros(8))


def test_assign_level_dfa_bounds():
    assert assign_level_dfa(0.5) == 1
    assert assign_level_dfa(1.5) == 8
    assert assign_level_dfa(0.0) == 1  # clamped below
    assert assign_level_dfa(3.0) == 8  # clamped above


def test_assign_level_dfa_monotone():
    alphas = np.linspace(0.5, 1.5, 21)
    levels = [assign_level_dfa(a) for a in alphas]
    assert levels == sorted(levels)
    assert set(levels) == set(range(1, 9))


def test_assign_level_dfa_descending_orientation():
    asc = assign_level_dfa(0.6, orientation="ascending")
    desc = assign_level_dfa(0.6, orientation="descending")
    assert asc + desc == 9


def test_turning_point_rate_iid():
    # Oracle: expected turning-point rate of iid noise is 2/3.
    rng = np.random.default_rng(13)
    rates = [turning_point_rate(rng.standard_normal(2048)) for _ in range(8)]
    assert np.mean(rates) == pytest.approx(2 / 3, abs=0.02)


def test_turning_point_rate_monotone_series():
    assert turning_point_rate(np.arange(100.0)) == 0.0


def test_turning_point_rate_alternating():
    x = np.array([0.0, 1.0] * 50)
    assert turning_point_rate(x) == pytest.approx(1.0)
