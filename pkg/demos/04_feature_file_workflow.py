"""Training a head on exported backbone features via PSNF files.

When the features come from a frozen convolutional backbone, the head is
all that trains. PSNF is the interchange format for that workflow; here
the "backbone features" are synthetic Gaussian blobs, so the whole loop
runs in seconds. Run:  python demos/04_feature_file_workflow.py
"""

import tempfile
from pathlib import Path

import numpy as np

from spinalfc import (
    Dataset,
    HeadConfig,
    TrainConfig,
    build_head,
    evaluate,
    fit,
    load_checkpoint,
    load_features,
    save_checkpoint,
    save_features,
)
from spinalfc.rng import init_rng

workdir = Path(tempfile.mkdtemp(prefix="spinalfc-demo-"))

# ---------------------------------------------------------------------------
# Fake a feature export: 10 class centers in 256 dims, mild noise.
# ---------------------------------------------------------------------------
rng = np.random.default_rng(4)
centers = rng.standard_normal((10, 256)) * 0.5


def draw(n, seed):
    local = np.random.default_rng(seed)
    labels = local.integers(0, 10, size=n)
    feats = centers[labels] + local.standard_normal((n, 256)) * 0.05
    return Dataset(feats.astype(np.float32), labels.astype(np.int64), 10)


save_features(draw(2000, 1), workdir / "train.psnf")
save_features(draw(500, 2), workdir / "test.psnf")
print("wrote", workdir / "train.psnf", "and test.psnf")

# The file is bit-exact on reload:
train = load_features(workdir / "train.psnf")
test = load_features(workdir / "test.psnf")
print(f"reloaded: n={train.n}, D={train.dim}, classes={train.n_classes}")

# ---------------------------------------------------------------------------
# Train the progressive head on the exported features.
# ---------------------------------------------------------------------------
head = build_head(HeadConfig("progressive", 256, 32, 3, 10, dropout_p=0.1), init_rng(0))
config = TrainConfig(optimizer="sgd", lr=0.02, momentum=0.9, batch_size=50, epochs=3, seed=0)
result = fit(head, train, test, config, metrics_path=workdir / "metrics.csv")
print(f"\nbest test accuracy {result.best_test_acc:.4f} at epoch {result.best_epoch}")
print("metrics written to", workdir / "metrics.csv")

# ---------------------------------------------------------------------------
# Checkpoint round trip: the reloaded head scores identically.
# ---------------------------------------------------------------------------
save_checkpoint(head, workdir / "final.psnc")
reloaded = load_checkpoint(workdir / "final.psnc")
acc, loss = evaluate(reloaded, test)
print(f"reloaded checkpoint: accuracy {acc:.4f}, loss {loss:.4f}")
