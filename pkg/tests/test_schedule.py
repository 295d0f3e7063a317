import numpy as np
import pytest

from timetok.core import DomainError, GranularitySchedule, level_sigma, tokens_for_level


def test_level_sigma_paper_values():
    assert level_sigma(8, 144, 8) == 0.0
    assert level_sigma(1, 144, 8) == 12.0
    assert level_sigma(4, 144, 8) == pytest.approx(48 / 7)


def test_level_sigma_monotone_decreasing():
    sigmas = [level_sigma(l, 128, 8) for l in range(1, 9)]
    assert all(a > b for a, b in zip(sigmas, sigmas[1:]))
    assert sigmas[-1] == 0.0


def test_level_sigma_domain_errors():
    with pytest.raises(DomainError):
        level_sigma(0, 128, 8)
    with pytest.raises(DomainError):
        level_sigma(9, 128, 8)


def test_tokens_for_level_pow2():
    assert tokens_for_level(1, "pow2", 128) == 1
    assert tokens_for_level(8, "pow2", 128) == 128
    assert [tokens_for_level(l, "pow2", 128) for l in range(1, 9)] == [
        1, 2, 4, 8, 16, 32, 64, 128,
    ]


def test_tokens_for_level_equal_bin():
    assert tokens_for_level(3, "equal-bin", 128) == 48
    assert tokens_for_level(8, "equal-bin", 128) == 128


def test_tokens_for_level_bad_level():
    with pytest.raises(DomainError):
        tokens_for_level(0, "pow2", 128)
    with pytest.raises(DomainError):
        tokens_for_level(9, "pow2", 128)


def test_schedule_invariants():
    for alloc in ("pow2", "equal-bin"):
        s = GranularitySchedule(allocation=alloc)
        assert s.budgets[-1] == s.total_tokens
        assert all(a < b for a, b in zip(s.budgets, s.budgets[1:]))
        assert s.sigmas[-1] == 0.0
        assert all(a > b for a, b in zip(s.sigmas, s.sigmas[1:]))


def test_schedule_roundtrip():
    s = GranularitySchedule(n_levels=4, total_tokens=8, series_length=64)
    assert GranularitySchedule.from_dict(s.to_dict()) == s
