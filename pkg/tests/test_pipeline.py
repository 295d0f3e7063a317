import numpy as np
import pytest

from timetok.pipeline.gctsg import choose_level
from timetok.pipeline.run import DEFAULT_CONFIG, load_run_config


def test_choose_level_clear_elbow():
    # Distances flatten after level 3: the 2->3 improvement dominates.
    d = [10.0, 9.5, 2.0, 1.9, 1.85, 1.84, 1.83, 1.82]
    level, imps = choose_level(d)
    assert level == 3
    assert len(imps) == 7
    assert imps[1] == pytest.approx((9.5 - 2.0) / 9.5)


def test_choose_level_fallback_when_flat():
    d = [1.0] * 8
    level, _ = choose_level(d)
    assert level == 1


def test_choose_level_threshold_boundary():
    # Exactly at the threshold does not clear it (strict >); above it does.
    assert choose_level([1.0, 0.75], threshold=0.25)[0] == 1
    assert choose_level([1.0, 0.5], threshold=0.25)[0] == 2


def test_choose_level_tie_goes_to_coarser():
    d = [4.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
    # improvements: 0.5, 0.5, 0, ... argmax returns the first -> level 2
    assert choose_level(d)[0] == 2


def test_choose_level_zero_distances_no_crash():
    level, imps = choose_level([0.0, 0.0, 0.0])
    assert level == 1
    assert np.isfinite(imps).all()


def test_run_config_defaults_complete():
    cfg = load_run_config(None)
    assert cfg == DEFAULT_CONFIG


def test_run_config_deep_merge(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("train:\n  stage1_steps: 3\n")
    cfg = load_run_config(p)
    assert cfg["train"]["stage1_steps"] == 3
    # untouched siblings keep their defaults
    for k, v in DEFAULT_CONFIG["train"].items():
        if k != "stage1_steps":
            assert cfg["train"][k] == v
    assert cfg["decoder"] == DEFAULT_CONFIG["decoder"]
