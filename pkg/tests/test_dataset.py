import numpy as np
import pytest

from timetok.core import IngestionError
from timetok.core.dataset import DatasetManifest, load_dataset


def _write_tsv(path, rows, labels):
    with open(path, "w") as fh:
        for lab, row in zip(labels, rows):
            fh.write("\t".join([str(lab)] + [f"{v:.6f}" for v in row]) + "\n")


@pytest.fixture()
def classification_dir(tmp_path):
    rng = np.random.default_rng(0)
    train = rng.standard_normal((20, 16)) + 5.0
    test = rng.standard_normal((8, 16)) + 5.0
    _write_tsv(tmp_path / "train.tsv", train, [1, 2] * 10)
    _write_tsv(tmp_path / "test.tsv", test, [2, 1] * 4)
    m = DatasetManifest(
        name="demo",
        train_path="train.tsv",
        test_path="test.tsv",
        series_length=16,
        n_classes=2,
        base_dir=str(tmp_path),
    )
    return tmp_path, m


def test_load_classification(classification_dir):
    _, m = classification_dir
    train, test = load_dataset(m)
    assert len(train) == 20 and len(test) == 8
    assert {s.class_label for s in train} == {0, 1}
    stacked = np.stack([s.values for s in train])
    # z-scored with train statistics
    assert abs(stacked.mean()) < 1e-9
    assert stacked.std() == pytest.approx(1.0, rel=1e-6)
    # test split uses the same (train) stats, so it is close to but not
    # exactly standardized
    assert test[0].norm is train[0].norm


def test_manifest_yaml_roundtrip(classification_dir, tmp_path):
    _, m = classification_dir
    m.save(tmp_path / "manifest.yaml")
    loaded = DatasetManifest.load(tmp_path / "manifest.yaml")
    assert loaded.name == m.name
    assert loaded.series_length == 16
    assert loaded.base_dir == str(tmp_path)


def test_manifest_rejects_unknown_keys(tmp_path):
    (tmp_path / "bad.yaml").write_text("name: x\nbogus_key: 1\n")
    with pytest.raises(IngestionError):
        DatasetManifest.load(tmp_path / "bad.yaml")


def test_length_mismatch_reported(classification_dir):
    tmp_path, m = classification_dir
    bad = DatasetManifest(**{**m.__dict__, "series_length": 99})
    with pytest.raises(IngestionError, match="99"):
        load_dataset(bad)


def test_non_finite_rejected_with_location(tmp_path):
    rows = np.ones((3, 8))
    _write_tsv(tmp_path / "train.tsv", rows, [1, 1, 2])
    text = (tmp_path / "train.tsv").read_text().replace("1.000000", "nan", 1)
    (tmp_path / "train.tsv").write_text(text)
    _write_tsv(tmp_path / "test.tsv", rows, [1, 2, 2])
    m = DatasetManifest(
        name="x",
        train_path="train.tsv",
        test_path="test.tsv",
        series_length=8,
        n_classes=2,
        base_dir=str(tmp_path),
    )
    with pytest.raises(IngestionError, match="row"):
        load_dataset(m)


def test_forecasting_windows(tmp_path):
    rng = np.random.default_rng(1)
    long_rows = rng.standard_normal((2, 40))
    with open(tmp_path / "train.csv", "w") as fh:
        for row in long_rows:
            fh.write(",".join(f"{v:.6f}" for v in row) + "\n")
    with open(tmp_path / "test.csv", "w") as fh:
        fh.write(",".join(f"{v:.6f}" for v in long_rows[0]) + "\n")
    m = DatasetManifest(
        name="fc",
        train_path="train.csv",
        test_path="test.csv",
        series_length=16,
        n_classes=0,
        file_format="csv",
        window_stride=8,
        base_dir=str(tmp_path),
    )
    train, test = load_dataset(m)
    # (40 - 16) // 8 + 1 = 4 windows per row
    assert len(train) == 8
    assert len(test) == 4
    assert all(s.values.size == 16 for s in train)
    assert all(s.class_label is None for s in train)
