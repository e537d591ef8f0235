"""Layer primitives with explicit forward and backward passes.

Everything here is written against the contract that gradients accumulate
into per-layer buffers until zero_grads() is called, and that a backward
call always follows a forward call that cached its inputs.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import ConfigError, DataError, ShapeError, StateError


class LinearLayer:
    """Affine map y = x @ W + b with gradient accumulation.

    W has shape (in_dim, out_dim), b is a row vector of length out_dim.
    dW/db mirror W/b and accumulate across backward calls.
    """

    def __init__(self, W: np.ndarray, b: np.ndarray):
        linalg.check_matrix(W, "W")
        b = np.asarray(b)
        if b.ndim != 1 or b.shape[0] != W.shape[1]:
            raise ShapeError(f"bias length {b.shape} does not match W columns {W.shape[1]}")
        self.W = W
        self.b = b
        self.dW = np.zeros_like(W)
        self.db = np.zeros_like(b)
        self._x: np.ndarray | None = None

    @property
    def in_dim(self) -> int:
        return self.W.shape[0]

    @property
    def out_dim(self) -> int:
        return self.W.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.in_dim:
            raise ShapeError(
                f"linear forward: input has {x.shape[1]} columns, layer expects {self.in_dim}"
            )
        self._x = x
        return linalg.add_row_vector(linalg.matmul(x, self.W), self.b)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if self._x is None:
            raise StateError("linear backward called without a cached forward")
        if grad_out.shape != (self._x.shape[0], self.out_dim):
            raise ShapeError(
                f"linear backward: grad shape {grad_out.shape}, "
                f"expected {(self._x.shape[0], self.out_dim)}"
            )
        self.dW += linalg.matmul(linalg.transpose(self._x), grad_out)
        self.db += grad_out.sum(axis=0)
        return linalg.matmul(grad_out, linalg.transpose(self.W))

    def zero_grads(self) -> None:
        self.dW[...] = 0
        self.db[...] = 0


class Relu:
    """max(0, x) with the subgradient at exactly 0 fixed to 0."""

    def __init__(self):
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if self._mask is None:
            raise StateError("relu backward called without a cached forward")
        if grad_out.shape != self._mask.shape:
            raise ShapeError(
                f"relu backward: grad shape {grad_out.shape}, expected {self._mask.shape}"
            )
        return grad_out * self._mask


class Dropout:
    """Inverted dropout: survivors scaled by 1/(1-p) so eval needs no rescale.

    In train mode the mask is drawn per forward call (entries exactly 0 or
    exactly 1/(1-p)) and reused bit-exactly by backward. In eval mode the
    forward pass is the identity.
    """

    def __init__(self, p: float):
        if not (0.0 <= p < 1.0):
            raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
        self.p = float(p)
        self.mode = "train"
        self.mask: np.ndarray | None = None

    def forward(self, x: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.mode == "eval":
            self.mask = None
            return x
        if rng is None:
            raise StateError("train-mode dropout needs an rng")
        keep = rng.random(size=x.shape) >= self.p
        self.mask = keep.astype(x.dtype) / x.dtype.type(1.0 - self.p)
        return x * self.mask

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if self.mask is None:
            raise StateError("dropout backward called without a train-mode forward")
        if grad_out.shape != self.mask.shape:
            raise ShapeError(
                f"dropout backward: grad shape {grad_out.shape}, expected {self.mask.shape}"
            )
        return grad_out * self.mask


def nll_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood over log-softmax of the logits.

    Returns (loss, grad_logits) where grad_logits = (softmax - onehot)/batch.
    Uses max-subtraction so arbitrarily large logits cannot overflow.
    """
    linalg.check_matrix(logits, "logits")
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != logits.shape[0]:
        raise ShapeError(
            f"labels shape {labels.shape} does not match batch size {logits.shape[0]}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise DataError(f"labels must be integers, got dtype {labels.dtype}")
    n_classes = logits.shape[1]
    if labels.min() < 0 or labels.max() >= n_classes:
        raise DataError(
            f"labels must lie in [0, {n_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    batch = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -float(log_probs[np.arange(batch), labels].mean(dtype=np.float64)) + 0.0
    grad = np.exp(log_probs)
    grad[np.arange(batch), labels] -= 1
    grad /= grad.dtype.type(batch)
    return loss, grad


def init_layer(
    in_dim: int,
    out_dim: int,
    rng: np.random.Generator,
    dtype=np.float32,
) -> LinearLayer:
    """Kaiming-uniform weights, W ~ U(-sqrt(6/in_dim), +sqrt(6/in_dim)), zero bias."""
    if in_dim < 1 or out_dim < 1:
        raise ConfigError(f"layer dims must be >= 1, got {in_dim}x{out_dim}")
    bound = np.sqrt(6.0 / in_dim)
    W = rng.uniform(-bound, bound, size=(in_dim, out_dim)).astype(dtype)
    b = np.zeros(out_dim, dtype=dtype)
    return LinearLayer(W, b)
