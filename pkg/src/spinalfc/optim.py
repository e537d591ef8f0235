"""Parameter update rules: SGD with classic momentum, Adam, and step decay.

An optimizer instance is bound to one head's (param, grad) pairs and updates
the parameter arrays in place; `lr` is a plain attribute so a schedule can
reassign it between epochs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ShapeError


def _check_pairs(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> list:
    pairs = list(pairs)
    for param, grad in pairs:
        if param.shape != grad.shape:
            raise ShapeError(
                f"gradient shape {grad.shape} does not mirror parameter {param.shape}"
            )
    return pairs


class SGD:
    """v <- momentum*v + g; w <- w - lr*v (no dampening, no Nesterov)."""

    def __init__(self, pairs, lr: float, momentum: float = 0.0):
        if lr <= 0:
            raise ConfigError(f"lr must be > 0, got {lr}")
        if not (0.0 <= momentum < 1.0):
            raise ConfigError(f"momentum must be in [0, 1), got {momentum}")
        self.pairs = _check_pairs(pairs)
        self.lr = float(lr)
        self.momentum = float(momentum)
        self.velocity = [np.zeros_like(p) for p, _ in self.pairs]

    def step(self) -> None:
        for (param, grad), v in zip(self.pairs, self.velocity):
            if grad.shape != param.shape:
                raise ShapeError(
                    f"gradient shape {grad.shape} does not mirror parameter {param.shape}"
                )
            v *= self.momentum
            v += grad
            param -= param.dtype.type(self.lr) * v


class Adam:
    """Bias-corrected Adam with the standard defaults."""

    def __init__(
        self,
        pairs,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ConfigError(f"lr must be > 0, got {lr}")
        if not (0.0 <= beta1 < 1.0) or not (0.0 <= beta2 < 1.0):
            raise ConfigError(f"betas must be in [0, 1), got ({beta1}, {beta2})")
        if eps <= 0:
            raise ConfigError(f"eps must be > 0, got {eps}")
        self.pairs = _check_pairs(pairs)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m = [np.zeros_like(p) for p, _ in self.pairs]
        self.u = [np.zeros_like(p) for p, _ in self.pairs]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for (param, grad), m, u in zip(self.pairs, self.m, self.u):
            if grad.shape != param.shape:
                raise ShapeError(
                    f"gradient shape {grad.shape} does not mirror parameter {param.shape}"
                )
            m *= b1
            m += (1.0 - b1) * grad
            u *= b2
            u += (1.0 - b2) * grad * grad
            m_hat = m / bias1
            u_hat = u / bias2
            param -= (self.lr * m_hat / (np.sqrt(u_hat) + self.eps)).astype(param.dtype)


@dataclass(frozen=True)
class StepLR:
    """lr(epoch) = base_lr * gamma^floor(epoch / step_size)."""

    base_lr: float
    step_size: int = 7
    gamma: float = 0.1

    def __post_init__(self):
        if self.base_lr <= 0:
            raise ConfigError(f"base_lr must be > 0, got {self.base_lr}")
        if self.step_size < 1:
            raise ConfigError(f"step_size must be >= 1, got {self.step_size}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")

    def lr_at(self, epoch: int) -> float:
        if epoch < 0:
            raise ConfigError(f"epoch must be >= 0, got {epoch}")
        return self.base_lr * self.gamma ** (epoch // self.step_size)


def make_optimizer(name: str, pairs, lr: float, **kwargs):
    """Build an optimizer by its config name ('sgd' or 'adam')."""
    if name == "sgd":
        return SGD(pairs, lr, momentum=kwargs.get("momentum", 0.0))
    if name == "adam":
        return Adam(
            pairs,
            lr,
            beta1=kwargs.get("beta1", 0.9),
            beta2=kwargs.get("beta2", 0.999),
            eps=kwargs.get("eps", 1e-8),
        )
    raise ConfigError(f"unknown optimizer {name!r}, expected 'sgd' or 'adam'")
