"""Training/evaluation loop, metrics logging, and the PSNC checkpoint format.

The loop reproduces the "best over all epochs" protocol: every epoch is
trained on a freshly shuffled permutation, evaluated on the test set, and
the checkpoint with the highest test accuracy so far is kept.

PSNC checkpoints are little-endian:

    magic "PSNC" | u16 version=1 | u8 variant (0 plain, 1 spinal, 2 progressive)
    | u32 D | u32 H | u16 L | u32 C | f32 dropout_p
    | per hidden layer 1..L: W row-major float32, then b float32
    | classifier: W row-major float32, then b float32

File size is therefore 25 + 4 * param_count bytes, and a load/save round
trip reproduces eval-mode logits bit-exactly at float32 compute.
"""

from __future__ import annotations

import io
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as rng_mod
from .data import Dataset, iterate, make_batches
from .errors import ConfigError, FormatError
from .heads import Head, HeadConfig, param_count
from .nn import LinearLayer, nll_loss
from .optim import StepLR, make_optimizer

_PSNC_HEADER = struct.Struct("<4sHBIIHIf")
PSNC_MAGIC = b"PSNC"
PSNC_VERSION = 1
_VARIANT_CODES = {"plain": 0, "spinal": 1, "progressive": 2}
_VARIANT_NAMES = {v: k for k, v in _VARIANT_CODES.items()}

EVAL_BATCH = 256
METRICS_HEADER = "epoch,train_loss,train_acc,test_acc,lr,seconds"


@dataclass
class TrainConfig:
    """Optimizer choice and loop hyperparameters for one fit call."""

    optimizer: str = "sgd"
    lr: float = 0.001
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: StepLR | None = None
    batch_size: int = 100
    epochs: int = 50
    seed: int = 0
    loss: str = "nll"
    eval_every: int = 1

    def validate(self) -> None:
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")
        if self.loss != "nll":
            raise ConfigError(f"loss must be 'nll', got {self.loss!r}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")


@dataclass
class EpochMetrics:
    """One row of the metrics CSV; test_acc/test_loss are NaN on skipped evals."""

    epoch: int
    train_loss: float
    train_acc: float
    test_acc: float
    lr: float
    seconds: float

    def csv_row(self) -> str:
        test = "" if np.isnan(self.test_acc) else repr(self.test_acc)
        return (
            f"{self.epoch},{self.train_loss!r},{self.train_acc!r},"
            f"{test},{self.lr!r},{self.seconds:.3f}"
        )


@dataclass
class FitResult:
    best_test_acc: float
    best_epoch: int
    metrics: list[EpochMetrics] = field(default_factory=list)
    best_checkpoint: bytes = b""


def evaluate(head: Head, dataset: Dataset, batch_size: int = EVAL_BATCH) -> tuple[float, float]:
    """Eval-mode accuracy and mean per-sample loss; mutates nothing."""
    if dataset.dim != head.config.input_dim:
        raise ConfigError(
            f"dataset has {dataset.dim} features, head expects {head.config.input_dim}"
        )
    saved = head.mode
    head.set_mode("eval")
    try:
        correct = 0
        loss_sum = 0.0
        for start in range(0, dataset.n, batch_size):
            x = dataset.features[start : start + batch_size]
            y = dataset.labels[start : start + batch_size]
            logits = head.forward(x)
            loss, _ = nll_loss(logits, y)
            loss_sum += loss * x.shape[0]
            correct += int((np.argmax(logits, axis=1) == y).sum())
    finally:
        head.set_mode(saved)
    return correct / dataset.n, loss_sum / dataset.n


def fit(
    head: Head,
    train_set: Dataset,
    test_set: Dataset,
    config: TrainConfig,
    metrics_path=None,
) -> FitResult:
    """Train, evaluate per epoch, and track the best-test-accuracy checkpoint."""
    config.validate()
    if train_set.dim != head.config.input_dim or test_set.dim != head.config.input_dim:
        raise ConfigError(
            f"feature dims (train {train_set.dim}, test {test_set.dim}) do not match "
            f"head input_dim {head.config.input_dim}"
        )
    if train_set.n_classes > head.config.classes or test_set.n_classes > head.config.classes:
        raise ConfigError(
            f"dataset classes (train {train_set.n_classes}, test {test_set.n_classes}) "
            f"exceed head classes {head.config.classes}"
        )

    opt = make_optimizer(
        config.optimizer,
        head.param_grad_pairs(),
        config.lr,
        momentum=config.momentum,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
    )
    drop_rng = rng_mod.dropout_rng(config.seed)

    metrics_file = None
    if metrics_path is not None:
        Path(metrics_path).parent.mkdir(parents=True, exist_ok=True)
        metrics_file = open(metrics_path, "w")
        metrics_file.write(METRICS_HEADER + "\n")
        metrics_file.flush()

    result = FitResult(best_test_acc=-1.0, best_epoch=0)
    try:
        for epoch in range(1, config.epochs + 1):
            t0 = time.perf_counter()
            lr = config.schedule.lr_at(epoch - 1) if config.schedule else config.lr
            opt.lr = lr

            head.set_mode("train")
            plan = make_batches(train_set.n, config.batch_size, rng_mod.shuffle_rng(config.seed, epoch))
            loss_sum = 0.0
            correct = 0
            for x, y in iterate(train_set, plan):
                head.zero_grads()
                logits = head.forward(x, drop_rng)
                loss, grad = nll_loss(logits, y)
                head.backward(grad)
                opt.step()
                loss_sum += loss * x.shape[0]
                correct += int((np.argmax(logits, axis=1) == y).sum())
            train_loss = loss_sum / train_set.n
            train_acc = correct / train_set.n

            if epoch % config.eval_every == 0 or epoch == config.epochs:
                test_acc, _ = evaluate(head, test_set)
                if test_acc > result.best_test_acc:
                    result.best_test_acc = test_acc
                    result.best_epoch = epoch
                    result.best_checkpoint = serialize_head(head)
            else:
                test_acc = float("nan")

            row = EpochMetrics(
                epoch=epoch,
                train_loss=train_loss,
                train_acc=train_acc,
                test_acc=test_acc,
                lr=lr,
                seconds=time.perf_counter() - t0,
            )
            result.metrics.append(row)
            if metrics_file is not None:
                metrics_file.write(row.csv_row() + "\n")
                metrics_file.flush()
    finally:
        if metrics_file is not None:
            metrics_file.close()
    return result


def serialize_head(head: Head) -> bytes:
    """PSNC bytes for the head's current parameters."""
    cfg = head.config
    buf = io.BytesIO()
    buf.write(
        _PSNC_HEADER.pack(
            PSNC_MAGIC,
            PSNC_VERSION,
            _VARIANT_CODES[cfg.variant],
            cfg.input_dim,
            cfg.hidden,
            cfg.depth,
            cfg.classes,
            cfg.dropout_p,
        )
    )
    for lyr in head.layers():
        buf.write(np.ascontiguousarray(lyr.W, dtype="<f4").tobytes())
        buf.write(np.ascontiguousarray(lyr.b, dtype="<f4").tobytes())
    return buf.getvalue()


def deserialize_head(data: bytes) -> Head:
    """Rebuild a float32 eval-mode head from PSNC bytes."""
    if len(data) < _PSNC_HEADER.size:
        raise FormatError(f"checkpoint too short for a header: {len(data)} bytes")
    magic, version, vcode, d, h, depth, c, dropout_p = _PSNC_HEADER.unpack_from(data)
    if magic != PSNC_MAGIC:
        raise FormatError(f"bad checkpoint magic: expected {PSNC_MAGIC!r}, got {magic!r}")
    if version != PSNC_VERSION:
        raise FormatError(f"unsupported checkpoint version: {version}")
    if vcode not in _VARIANT_NAMES:
        raise FormatError(f"unknown variant code {vcode}, expected 0, 1 or 2")
    try:
        cfg = HeadConfig(
            variant=_VARIANT_NAMES[vcode],
            input_dim=d,
            hidden=h,
            depth=depth,
            classes=c,
            dropout_p=float(dropout_p),
        )
        cfg.validate()
    except (ConfigError, ValueError) as exc:
        raise FormatError(f"checkpoint header describes an invalid head: {exc}") from exc
    expected = _PSNC_HEADER.size + 4 * param_count(cfg)
    if len(data) != expected:
        raise FormatError(f"checkpoint declares {expected} bytes, found {len(data)}")

    from .heads import classifier_in_dim, hidden_in_dims  # local to avoid cycle at import

    off = _PSNC_HEADER.size

    def take(in_dim: int, out_dim: int) -> LinearLayer:
        nonlocal off
        W = (
            np.frombuffer(data, dtype="<f4", count=in_dim * out_dim, offset=off)
            .reshape(in_dim, out_dim)
            .astype(np.float32)
        )
        off += in_dim * out_dim * 4
        b = np.frombuffer(data, dtype="<f4", count=out_dim, offset=off).astype(np.float32)
        off += out_dim * 4
        return LinearLayer(W, b)

    hidden_layers = [take(in_dim, cfg.hidden) for in_dim in hidden_in_dims(cfg)]
    classifier = take(classifier_in_dim(cfg), cfg.classes)
    head = Head(cfg, hidden_layers, classifier, dtype=np.float32)
    head.set_mode("eval")
    return head


def save_checkpoint(head: Head, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(serialize_head(head))


def load_checkpoint(path) -> Head:
    return deserialize_head(Path(path).read_bytes())
