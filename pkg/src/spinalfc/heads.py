"""The three dense classifier-head architectures and their wiring rules.

All variants are stacks of L hidden linear layers (each followed by ReLU and
inverted dropout, every hidden layer emitting H features) plus one linear
classifier emitting C logits. They differ only in what each layer consumes:

progressive
    Hidden layer k consumes the raw input joined with every earlier hidden
    output, so its width grows by exactly H per layer: D + (k-1)*H in,
    H out. The classifier consumes [x, h1, ..., hL] (D + L*H columns).
    Because the classifier touches every hidden output directly, the loss
    reaches each layer through a length-1 backward path (a gradient
    highway) in addition to the usual chained paths.

plain
    The standard MLP chain: D -> H -> ... -> H -> C.

spinal
    The input is split into halves A = columns [0, D//2) and
    B = columns [D//2, D). Layer 1 consumes half A alone; layer k >= 2
    consumes its half (alternating A, B, A, B, ...) joined with the
    previous hidden output. The classifier consumes [h1, ..., hL].

Inside every concatenation the block order is fixed ([x, h1, h2, ...] for
progressive, [half, h_prev] for spinal) and backward routes gradient slices
back to their producers at exactly those offsets. Gradient slices that land
on raw-input blocks are computed and discarded: there is no upstream
feature extractor in this package, only the head.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .errors import ConfigError, ShapeError, StateError
from .nn import Dropout, LinearLayer, Relu, init_layer

VARIANTS = ("plain", "spinal", "progressive")


@dataclass(frozen=True)
class HeadConfig:
    """Architecture descriptor: wiring variant plus the five size knobs."""

    variant: str
    input_dim: int
    hidden: int
    depth: int
    classes: int
    dropout_p: float = 0.0

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.hidden < 1:
            raise ConfigError(f"hidden must be >= 1, got {self.hidden}")
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.classes < 2:
            raise ConfigError(f"classes must be >= 2, got {self.classes}")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ConfigError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.variant == "spinal" and self.input_dim < 2:
            raise ConfigError(
                f"spinal needs input_dim >= 2 to split halves, got {self.input_dim}"
            )


def _spinal_halves(config: HeadConfig) -> tuple[slice, slice]:
    """Column slices of the two input halves; A gets the floor on odd dims."""
    half = config.input_dim // 2
    return slice(0, half), slice(half, config.input_dim)


def _spinal_half_for_layer(config: HeadConfig, k: int) -> slice:
    """Half consumed by 1-based layer k: A, B, A, B, ..."""
    a, b = _spinal_halves(config)
    return a if k % 2 == 1 else b


def hidden_in_dims(config: HeadConfig) -> list[int]:
    """Input width of each hidden layer, in layer order."""
    config.validate()
    d, h, depth = config.input_dim, config.hidden, config.depth
    if config.variant == "progressive":
        return [d + (k - 1) * h for k in range(1, depth + 1)]
    if config.variant == "plain":
        return [d] + [h] * (depth - 1)
    dims = []
    for k in range(1, depth + 1):
        sl = _spinal_half_for_layer(config, k)
        half_width = sl.stop - sl.start
        dims.append(half_width if k == 1 else half_width + h)
    return dims


def classifier_in_dim(config: HeadConfig) -> int:
    """Input width of the final classifier layer."""
    config.validate()
    d, h, depth = config.input_dim, config.hidden, config.depth
    if config.variant == "progressive":
        return d + depth * h
    if config.variant == "plain":
        return h
    return depth * h


def param_count(config: HeadConfig) -> int:
    """Closed-form parameter count (weights plus biases, all layers)."""
    h, c = config.hidden, config.classes
    total = sum(in_dim * h + h for in_dim in hidden_in_dims(config))
    total += classifier_in_dim(config) * c + c
    return total


class Head:
    """An instantiated head: L hidden layers plus a classifier.

    Owns per-layer ReLU and dropout state and the train/eval mode flag.
    One head belongs to one training thread; eval-mode forward on a frozen
    head is safe to share.
    """

    def __init__(
        self,
        config: HeadConfig,
        hidden_layers: list[LinearLayer],
        classifier: LinearLayer,
        dtype=np.float32,
    ):
        config.validate()
        self.config = config
        self.hidden_layers = hidden_layers
        self.classifier = classifier
        self.relus = [Relu() for _ in hidden_layers]
        self.dropouts = [Dropout(config.dropout_p) for _ in hidden_layers]
        self.dtype = np.dtype(dtype)
        self.mode = "train"
        self._cached_batch: int | None = None

    def set_mode(self, mode: str) -> None:
        if mode not in ("train", "eval"):
            raise ConfigError(f"mode must be 'train' or 'eval', got {mode!r}")
        self.mode = mode
        for d in self.dropouts:
            d.mode = mode

    def layers(self) -> list[LinearLayer]:
        return [*self.hidden_layers, self.classifier]

    def layer_names(self) -> list[str]:
        return [f"hidden{k}" for k in range(1, len(self.hidden_layers) + 1)] + ["classifier"]

    def param_grad_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        pairs = []
        for lyr in self.layers():
            pairs.append((lyr.W, lyr.dW))
            pairs.append((lyr.b, lyr.db))
        return pairs

    def zero_grads(self) -> None:
        for lyr in self.layers():
            lyr.zero_grads()

    def forward(self, x: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        """Run the variant's wiring; returns batch x classes logits.

        rng feeds the dropout masks and is only needed in train mode.
        """
        linalg.check_matrix(x, "x")
        cfg = self.config
        if x.shape[1] != cfg.input_dim:
            raise ShapeError(
                f"forward: input has {x.shape[1]} columns, head expects {cfg.input_dim}"
            )
        x = np.ascontiguousarray(x, dtype=self.dtype)
        self._cached_batch = x.shape[0]

        if cfg.variant == "progressive":
            blocks = [x]
            for k, (lin, relu, drop) in enumerate(
                zip(self.hidden_layers, self.relus, self.dropouts), start=1
            ):
                joined = linalg.concat_cols(blocks)
                assert joined.shape[1] == cfg.input_dim + (k - 1) * cfg.hidden
                blocks.append(drop.forward(relu.forward(lin.forward(joined)), rng))
            return self.classifier.forward(linalg.concat_cols(blocks))

        if cfg.variant == "plain":
            h = x
            for lin, relu, drop in zip(self.hidden_layers, self.relus, self.dropouts):
                h = drop.forward(relu.forward(lin.forward(h)), rng)
            return self.classifier.forward(h)

        # spinal
        outputs = []
        prev = None
        for k, (lin, relu, drop) in enumerate(
            zip(self.hidden_layers, self.relus, self.dropouts), start=1
        ):
            half = np.ascontiguousarray(x[:, _spinal_half_for_layer(cfg, k)])
            joined = half if prev is None else linalg.concat_cols([half, prev])
            prev = drop.forward(relu.forward(lin.forward(joined)), rng)
            outputs.append(prev)
        return self.classifier.forward(linalg.concat_cols(outputs))

    def backward(self, grad_logits: np.ndarray) -> None:
        """Accumulate dW/db for every layer from the logit gradient.

        The gradient reaching hidden output h_k is the sum of the
        classifier's slice for h_k and the slices from every later layer
        that consumed h_k. Raw-input slices are discarded at the boundary.
        """
        if self.mode != "train" or self._cached_batch is None:
            raise StateError("backward requires a prior train-mode forward")
        if grad_logits.shape != (self._cached_batch, self.config.classes):
            raise ShapeError(
                f"backward: grad shape {grad_logits.shape}, expected "
                f"{(self._cached_batch, self.config.classes)}"
            )
        cfg = self.config
        d, h, depth = cfg.input_dim, cfg.hidden, cfg.depth
        g_cat = self.classifier.backward(grad_logits)

        if cfg.variant == "plain":
            g = g_cat
            for lin, relu, drop in zip(
                reversed(self.hidden_layers), reversed(self.relus), reversed(self.dropouts)
            ):
                g = lin.backward(relu.backward(drop.backward(g)))
            return

        if cfg.variant == "progressive":
            # classifier input blocks: [x | h1 | ... | hL]
            grad_h = [
                g_cat[:, d + k * h : d + (k + 1) * h].copy() for k in range(depth)
            ]
            for k in reversed(range(depth)):
                g = self.dropouts[k].backward(grad_h[k])
                g = self.relus[k].backward(g)
                g_in = self.hidden_layers[k].backward(g)
                # layer k consumed [x | h1 | ... | h_{k-1}]
                for j in range(k):
                    grad_h[j] += g_in[:, d + j * h : d + (j + 1) * h]
            return

        # spinal: classifier input blocks [h1 | ... | hL]
        grad_h = [g_cat[:, k * h : (k + 1) * h].copy() for k in range(depth)]
        for k in reversed(range(depth)):
            g = self.dropouts[k].backward(grad_h[k])
            g = self.relus[k].backward(g)
            g_in = self.hidden_layers[k].backward(g)
            if k > 0:
                sl = _spinal_half_for_layer(cfg, k + 1)
                half_width = sl.stop - sl.start
                grad_h[k - 1] += g_in[:, half_width:]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Argmax labels from an eval-mode forward; ties go to the lowest index."""
        saved = self.mode
        self.set_mode("eval")
        try:
            logits = self.forward(x)
        finally:
            self.set_mode(saved)
        return np.argmax(logits, axis=1)


def build_head(
    config: HeadConfig,
    rng: np.random.Generator,
    dtype=np.float32,
) -> Head:
    """Initialize all layers in deterministic order: hidden 1..L, then classifier."""
    config.validate()
    hidden = [
        init_layer(in_dim, config.hidden, rng, dtype=dtype)
        for in_dim in hidden_in_dims(config)
    ]
    classifier = init_layer(classifier_in_dim(config), config.classes, rng, dtype=dtype)
    return Head(config, hidden, classifier, dtype=dtype)


def with_dropout(config: HeadConfig, p: float) -> HeadConfig:
    """Copy of the config with a different dropout probability."""
    return replace(config, dropout_p=p)
