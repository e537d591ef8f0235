"""Two epochs on MNIST with the library API (no CLI).

Uses the bundled IDX files under data/mnist/. The committed 50-epoch
configs under configs/ are the full protocol; this is the two-minute tour.
Run from the repository root:  python demos/05_mnist_quickstart.py
"""

import sys
from pathlib import Path

from spinalfc import HeadConfig, TrainConfig, build_head, evaluate, fit, load_idx
from spinalfc.data import standardize
from spinalfc.rng import init_rng

mnist = Path("data/mnist")
if not (mnist / "train-images-idx3-ubyte.gz").is_file():
    sys.exit("run from the repository root (data/mnist/ not found)")

train = load_idx(mnist / "train-images-idx3-ubyte.gz", mnist / "train-labels-idx1-ubyte.gz")
test = load_idx(mnist / "t10k-images-idx3-ubyte.gz", mnist / "t10k-labels-idx1-ubyte.gz")
train, test = standardize(train, test)
print(f"train n={train.n}, test n={test.n}, D={train.dim}")

head = build_head(
    HeadConfig("progressive", input_dim=784, hidden=128, depth=6, classes=10, dropout_p=0.2),
    init_rng(1),
)
config = TrainConfig(optimizer="sgd", lr=0.001, momentum=0.9, batch_size=100, epochs=2, seed=1)

print("training 2 epochs (about half a minute per epoch on a laptop)...")
result = fit(head, train, test, config)
for m in result.metrics:
    print(
        f"epoch {m.epoch}: train_loss={m.train_loss:.4f} "
        f"train_acc={m.train_acc:.4f} test_acc={m.test_acc:.4f} ({m.seconds:.0f}s)"
    )

acc, loss = evaluate(head, test)
print(f"\nfinal test accuracy {acc:.4f}; the 50-epoch protocol reaches about 0.98")
