"""Dataset ingestion: hand-built IDX fixtures, PSNF byte layout, batch plans."""

import gzip
import struct

import numpy as np
import pytest

from spinalfc.data import (
    Dataset,
    iterate,
    load_features,
    load_idx,
    make_batches,
    save_features,
    standardize,
)
from spinalfc.errors import DataError, FormatError
from spinalfc.rng import shuffle_rng

from conftest import needs_mnist


def idx_images_bytes(images: np.ndarray) -> bytes:
    """Hand-build an IDX image file: >u32 magic 2051, n, rows, cols, u8 pixels."""
    n, rows, cols = images.shape
    return struct.pack(">IIII", 2051, n, rows, cols) + images.astype(np.uint8).tobytes()


def idx_labels_bytes(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">II", 2049, labels.shape[0]) + labels.tobytes()


@pytest.fixture
def tiny_idx(tmp_path):
    """Two 2x2 images: one all-255, one counting 0..3; labels 1, 0."""
    images = np.array(
        [[[255, 255], [255, 255]], [[0, 1], [2, 3]]], dtype=np.uint8
    )
    img_path = tmp_path / "imgs.idx"
    lab_path = tmp_path / "labs.idx"
    img_path.write_bytes(idx_images_bytes(images))
    lab_path.write_bytes(idx_labels_bytes([1, 0]))
    return img_path, lab_path


class TestLoadIdx:
    def test_parses_hand_built_fixture(self, tiny_idx):
        ds = load_idx(*tiny_idx)
        assert ds.n == 2 and ds.dim == 4
        np.testing.assert_array_equal(ds.features[0], [1.0, 1.0, 1.0, 1.0])
        np.testing.assert_array_equal(
            ds.features[1], np.array([0, 1, 2, 3], dtype=np.float32) / 255.0
        )
        np.testing.assert_array_equal(ds.labels, [1, 0])

    def test_pixel_255_is_exactly_one(self, tiny_idx):
        ds = load_idx(*tiny_idx)
        assert ds.features[0, 0] == 1.0

    def test_gzipped_detected_by_magic(self, tiny_idx, tmp_path):
        img_path, lab_path = tiny_idx
        gz_img = tmp_path / "imgs.idx.gz"
        gz_lab = tmp_path / "labs.idx.gz"
        gz_img.write_bytes(gzip.compress(img_path.read_bytes()))
        gz_lab.write_bytes(gzip.compress(lab_path.read_bytes()))
        plain = load_idx(img_path, lab_path)
        zipped = load_idx(gz_img, gz_lab)
        assert plain.features.tobytes() == zipped.features.tobytes()
        np.testing.assert_array_equal(plain.labels, zipped.labels)

    def test_wrong_image_magic_names_both(self, tiny_idx, tmp_path):
        _, lab_path = tiny_idx
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">IIII", 2052, 1, 2, 2) + bytes(4))
        with pytest.raises(FormatError, match="2051.*2052"):
            load_idx(bad, lab_path)

    def test_wrong_label_magic(self, tiny_idx, tmp_path):
        img_path, _ = tiny_idx
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">II", 2051, 2) + bytes(2))
        with pytest.raises(FormatError, match="2049"):
            load_idx(img_path, bad)

    def test_count_mismatch(self, tiny_idx, tmp_path):
        img_path, _ = tiny_idx
        three = tmp_path / "three.idx"
        three.write_bytes(idx_labels_bytes([0, 1, 0]))
        with pytest.raises(DataError, match="2.*3"):
            load_idx(img_path, three)

    def test_truncated_is_io_error(self, tiny_idx, tmp_path):
        img_path, lab_path = tiny_idx
        cut = tmp_path / "cut.idx"
        cut.write_bytes(img_path.read_bytes()[:-1])
        with pytest.raises(IOError, match="truncated"):
            load_idx(cut, lab_path)


@needs_mnist
class TestMnistLoaderGate:
    def test_published_split_sizes(self, mnist_train, mnist_test):
        assert mnist_train.n == 60000 and mnist_train.dim == 784
        assert mnist_test.n == 10000 and mnist_test.dim == 784
        assert mnist_train.n_classes == 10

    def test_value_range_and_global_mean(self, mnist_train):
        assert mnist_train.features.min() >= 0.0
        assert mnist_train.features.max() <= 1.0
        assert 0.12 <= float(mnist_train.features.mean(dtype=np.float64)) <= 0.14


class TestPsnf:
    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = Dataset(
            rng.standard_normal((7, 5)).astype(np.float32),
            rng.integers(0, 3, size=7).astype(np.int64),
            3,
        )
        path = tmp_path / "f.psnf"
        save_features(ds, path)
        back = load_features(path)
        assert back.features.tobytes() == ds.features.tobytes()
        np.testing.assert_array_equal(back.labels, ds.labels)
        assert back.n_classes == 3

    def test_single_value_byte_layout(self, tmp_path):
        # magic(4) + version(2) + n(4) + D(4) + classes(4) + 1 float(4) + 1 label(4)
        ds = Dataset(np.array([[0.5]], dtype=np.float32), np.array([0]), 1)
        path = tmp_path / "one.psnf"
        save_features(ds, path)
        raw = path.read_bytes()
        assert len(raw) == 26
        expected = (
            struct.pack("<4sHIII", b"PSNF", 1, 1, 1, 1)
            + struct.pack("<f", 0.5)
            + struct.pack("<I", 0)
        )
        assert raw == expected
        back = load_features(path)
        assert back.features[0, 0] == 0.5 and back.labels[0] == 0

    def test_truncated_by_one_byte(self, tmp_path):
        ds = Dataset(np.ones((2, 2), dtype=np.float32), np.array([0, 1]), 2)
        path = tmp_path / "f.psnf"
        save_features(ds, path)
        cut = tmp_path / "cut.psnf"
        cut.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(FormatError):
            load_features(cut)

    def test_bad_magic_and_version(self, tmp_path):
        good = struct.pack("<4sHIII", b"PSNF", 1, 1, 1, 1) + bytes(8)
        bad_magic = tmp_path / "bad1.psnf"
        bad_magic.write_bytes(b"XSNF" + good[4:])
        with pytest.raises(FormatError, match="magic"):
            load_features(bad_magic)
        bad_version = tmp_path / "bad2.psnf"
        bad_version.write_bytes(good[:4] + struct.pack("<H", 9) + good[6:])
        with pytest.raises(FormatError, match="version"):
            load_features(bad_version)


class TestBatches:
    def test_remainder_rule(self):
        plan = make_batches(5, 2, shuffle_rng(0, 0))
        ds = Dataset(np.zeros((5, 2), dtype=np.float32), np.zeros(5, dtype=np.int64), 1)
        sizes = [x.shape[0] for x, _ in iterate(ds, plan)]
        assert sizes == [2, 2, 1]

    def test_partition_property(self):
        plan = make_batches(101, 7, shuffle_rng(1, 0))
        assert sorted(plan.order.tolist()) == list(range(101))

    def test_same_seed_same_permutation(self):
        a = make_batches(50, 10, shuffle_rng(3, 5))
        b = make_batches(50, 10, shuffle_rng(3, 5))
        np.testing.assert_array_equal(a.order, b.order)

    def test_fresh_permutation_per_epoch(self):
        a = make_batches(50, 10, shuffle_rng(3, 1))
        b = make_batches(50, 10, shuffle_rng(3, 2))
        assert not np.array_equal(a.order, b.order)

    def test_batch_size_validated(self):
        with pytest.raises(DataError):
            make_batches(5, 0, shuffle_rng(0, 0))


class TestStandardize:
    def test_train_stats_applied_to_both(self):
        rng = np.random.default_rng(2)
        tr = Dataset(rng.random((100, 3)).astype(np.float32), rng.integers(0, 2, 100), 2)
        te = Dataset(rng.random((40, 3)).astype(np.float32), rng.integers(0, 2, 40), 2)
        tr2, te2 = standardize(tr, te)
        assert abs(float(tr2.features.mean())) < 1e-5
        assert float(tr2.features.std()) == pytest.approx(1.0, abs=1e-4)
        mean = float(tr.features.mean(dtype=np.float64))
        std = float(tr.features.std(dtype=np.float64))
        np.testing.assert_allclose(te2.features, (te.features - mean) / std, rtol=1e-5)

    def test_zero_variance_rejected(self):
        ds = Dataset(np.ones((4, 2), dtype=np.float32), np.zeros(4, dtype=np.int64), 1)
        with pytest.raises(DataError):
            standardize(ds)


class TestDatasetValidation:
    def test_label_range(self):
        with pytest.raises(DataError):
            Dataset(np.ones((2, 2), dtype=np.float32), np.array([0, 5]), 2)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset(np.ones((2, 2), dtype=np.float32), np.array([0]), 2)
