"""Dense fully-connected classifier heads with a gradient highway.

Three head wirings over a hand-written backprop engine: a progressive head
whose every layer sees the raw input plus all earlier hidden outputs, a
plain MLP baseline, and a split-input spinal baseline. Includes SGD/Adam,
step decay, IDX and PSNF dataset loaders, a deterministic training loop,
and a finite-difference gradient-check oracle.
"""

from .data import BatchPlan, Dataset, iterate, load_features, load_idx, make_batches, save_features
from .errors import (
    ConfigError,
    DataError,
    FormatError,
    ShapeError,
    SizeError,
    StateError,
)
from .gradcheck import GradReport, check_gradients, check_head, numeric_gradient
from .heads import (
    Head,
    HeadConfig,
    VARIANTS,
    build_head,
    classifier_in_dim,
    hidden_in_dims,
    param_count,
)
from .nn import Dropout, LinearLayer, Relu, init_layer, nll_loss
from .optim import SGD, Adam, StepLR, make_optimizer
from .train import (
    EpochMetrics,
    FitResult,
    TrainConfig,
    deserialize_head,
    evaluate,
    fit,
    load_checkpoint,
    save_checkpoint,
    serialize_head,
)

__version__ = "0.1.0"

__all__ = [
    "BatchPlan",
    "Dataset",
    "iterate",
    "load_features",
    "load_idx",
    "make_batches",
    "save_features",
    "ConfigError",
    "DataError",
    "FormatError",
    "ShapeError",
    "SizeError",
    "StateError",
    "GradReport",
    "check_gradients",
    "check_head",
    "numeric_gradient",
    "Head",
    "HeadConfig",
    "VARIANTS",
    "build_head",
    "classifier_in_dim",
    "hidden_in_dims",
    "param_count",
    "Dropout",
    "LinearLayer",
    "Relu",
    "init_layer",
    "nll_loss",
    "SGD",
    "Adam",
    "StepLR",
    "make_optimizer",
    "EpochMetrics",
    "FitResult",
    "TrainConfig",
    "deserialize_head",
    "evaluate",
    "fit",
    "load_checkpoint",
    "save_checkpoint",
    "serialize_head",
    "__version__",
]
