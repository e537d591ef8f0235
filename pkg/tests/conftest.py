"""Shared fixtures: bundled MNIST paths and synthetic dataset builders."""

from pathlib import Path

import numpy as np
import pytest

from spinalfc.data import Dataset

REPO_ROOT = Path(__file__).resolve().parent.parent
MNIST_DIR = REPO_ROOT / "data" / "mnist"

MNIST_FILES = {
    "train_images": MNIST_DIR / "train-images-idx3-ubyte.gz",
    "train_labels": MNIST_DIR / "train-labels-idx1-ubyte.gz",
    "test_images": MNIST_DIR / "t10k-images-idx3-ubyte.gz",
    "test_labels": MNIST_DIR / "t10k-labels-idx1-ubyte.gz",
}

mnist_available = all(p.is_file() for p in MNIST_FILES.values())
needs_mnist = pytest.mark.skipif(
    not mnist_available, reason="bundled MNIST files missing under data/mnist/"
)


@pytest.fixture(scope="session")
def mnist_paths() -> dict:
    return {k: str(v) for k, v in MNIST_FILES.items()}


@pytest.fixture(scope="session")
def mnist_train(mnist_paths):
    from spinalfc.data import load_idx

    return load_idx(mnist_paths["train_images"], mnist_paths["train_labels"], name="mnist-train")


@pytest.fixture(scope="session")
def mnist_test(mnist_paths):
    from spinalfc.data import load_idx

    return load_idx(mnist_paths["test_images"], mnist_paths["test_labels"], name="mnist-test")


def gaussian_blobs(
    n: int,
    dim: int,
    classes: int,
    seed: int,
    center_scale: float = 8.0,
    noise: float = 1.0,
    name: str = "blobs",
) -> Dataset:
    """Linearly separable synthetic features: one well-spread center per class."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((classes, dim)) * center_scale / np.sqrt(dim)
    labels = rng.integers(0, classes, size=n)
    features = centers[labels] + rng.standard_normal((n, dim)) * noise / np.sqrt(dim)
    return Dataset(features.astype(np.float32), labels.astype(np.int64), classes, name=name)
