"""Dataset ingestion: IDX image/label files, the PSNF feature format, batching.

IDX (the MNIST-family container, optionally gzipped) is big-endian:

    images:  u32 magic=2051 | u32 n | u32 rows | u32 cols | n*rows*cols u8 pixels
    labels:  u32 magic=2049 | u32 n | n u8 labels

Pixels are flattened row-major to one feature row per image and scaled to
[0, 1] by /255.

PSNF is this package's little-endian interchange format for precomputed
feature matrices (e.g. exported from a frozen backbone):

    magic "PSNF" | u16 version=1 | u32 n | u32 D | u32 n_classes
    | n*D float32 features, row-major | n u32 labels

A PSNF save/load round trip is bitwise identity on float32 features and on
labels; features are stored as float32 regardless of compute precision.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049
PSNF_MAGIC = b"PSNF"
PSNF_VERSION = 1
_PSNF_HEADER = struct.Struct("<4sHIII")


@dataclass
class Dataset:
    """Feature matrix (n x D), integer labels (n,), class count, display name."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    name: str = "dataset"

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise DataError(f"features must be a non-empty 2-D array, got {self.features.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.features.shape[0]:
            raise DataError(
                f"labels length {self.labels.shape} does not match "
                f"{self.features.shape[0]} feature rows"
            )
        if self.n_classes < 1:
            raise DataError(f"n_classes must be >= 1, got {self.n_classes}")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise DataError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _read_binary(path) -> bytes:
    """Read a file, transparently gunzipping when it starts with 0x1f 0x8b."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def load_idx(images_path, labels_path, dtype=np.float32, name: str | None = None) -> Dataset:
    """Parse an IDX image/label file pair into a flattened, /255-scaled Dataset."""
    img = _read_binary(images_path)
    if len(img) < 16:
        raise IOError(f"truncated IDX image file {images_path}: only {len(img)} bytes")
    magic, n, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(
            f"bad IDX image magic in {images_path}: expected {IDX_IMAGE_MAGIC}, got {magic}"
        )
    if len(img) < 16 + n * rows * cols:
        raise IOError(
            f"truncated IDX image file {images_path}: header declares "
            f"{16 + n * rows * cols} bytes, found {len(img)}"
        )

    lab = _read_binary(labels_path)
    if len(lab) < 8:
        raise IOError(f"truncated IDX label file {labels_path}: only {len(lab)} bytes")
    lmagic, ln = struct.unpack(">II", lab[:8])
    if lmagic != IDX_LABEL_MAGIC:
        raise FormatError(
            f"bad IDX label magic in {labels_path}: expected {IDX_LABEL_MAGIC}, got {lmagic}"
        )
    if len(lab) < 8 + ln:
        raise IOError(
            f"truncated IDX label file {labels_path}: header declares {8 + ln} bytes, "
            f"found {len(lab)}"
        )
    if ln != n:
        raise DataError(f"image count {n} does not match label count {ln}")

    pixels = np.frombuffer(img, dtype=np.uint8, count=n * rows * cols, offset=16)
    features = pixels.reshape(n, rows * cols).astype(dtype) / np.dtype(dtype).type(255)
    labels = np.frombuffer(lab, dtype=np.uint8, count=n, offset=8).astype(np.int64)
    n_classes = int(labels.max()) + 1
    return Dataset(features, labels, n_classes, name=name or Path(images_path).stem)


def save_features(dataset: Dataset, path) -> None:
    """Write a Dataset as a PSNF file (features cast to little-endian float32)."""
    features = np.ascontiguousarray(dataset.features, dtype="<f4")
    labels = np.ascontiguousarray(dataset.labels, dtype="<u4")
    header = _PSNF_HEADER.pack(
        PSNF_MAGIC, PSNF_VERSION, dataset.n, dataset.dim, dataset.n_classes
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(features.tobytes())
        f.write(labels.tobytes())


def load_features(path, name: str | None = None) -> Dataset:
    """Parse a PSNF file; rejects bad magic/version and any length mismatch."""
    raw = Path(path).read_bytes()
    if len(raw) < _PSNF_HEADER.size:
        raise FormatError(f"PSNF file {path} too short for a header: {len(raw)} bytes")
    magic, version, n, dim, n_classes = _PSNF_HEADER.unpack_from(raw)
    if magic != PSNF_MAGIC:
        raise FormatError(f"bad PSNF magic in {path}: expected {PSNF_MAGIC!r}, got {magic!r}")
    if version != PSNF_VERSION:
        raise FormatError(f"unsupported PSNF version in {path}: {version}")
    expected = _PSNF_HEADER.size + n * dim * 4 + n * 4
    if len(raw) != expected:
        raise FormatError(
            f"PSNF file {path} declares {expected} bytes, found {len(raw)}"
        )
    off = _PSNF_HEADER.size
    features = (
        np.frombuffer(raw, dtype="<f4", count=n * dim, offset=off)
        .reshape(n, dim)
        .astype(np.float32)
    )
    labels = np.frombuffer(raw, dtype="<u4", count=n, offset=off + n * dim * 4).astype(
        np.int64
    )
    return Dataset(features, labels, int(n_classes), name=name or Path(path).stem)


@dataclass
class BatchPlan:
    """One epoch's visiting order: a permutation of [0, n), chunked."""

    batch_size: int
    order: np.ndarray
    drop_last: bool = False


def make_batches(n: int, batch_size: int, rng: np.random.Generator) -> BatchPlan:
    """Fresh shuffled permutation of [0, n); the last batch may be short."""
    if batch_size < 1:
        raise DataError(f"batch_size must be >= 1, got {batch_size}")
    return BatchPlan(batch_size=batch_size, order=rng.permutation(n))


def iterate(dataset: Dataset, plan: BatchPlan):
    """Yield (features, labels) batches following the plan's permutation."""
    n = dataset.n
    for start in range(0, n, plan.batch_size):
        idx = plan.order[start : start + plan.batch_size]
        if plan.drop_last and idx.shape[0] < plan.batch_size:
            return
        yield dataset.features[idx], dataset.labels[idx]


def standardize(train: Dataset, test: Dataset | None = None):
    """Shift/scale features by the train set's global mean and std.

    Optional alternative to the default plain [0, 1] pixel scaling.
    """
    mean = float(train.features.mean(dtype=np.float64))
    std = float(train.features.std(dtype=np.float64))
    if std == 0.0:
        raise DataError("cannot standardize: features have zero variance")

    def apply(ds: Dataset) -> Dataset:
        dt = ds.features.dtype
        scaled = (ds.features - dt.type(mean)) / dt.type(std)
        return Dataset(scaled, ds.labels, ds.n_classes, name=ds.name)

    if test is None:
        return apply(train)
    return apply(train), apply(test)
