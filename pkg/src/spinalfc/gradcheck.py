"""Finite-difference oracle for the hand-written backward passes.

Central differences at 64-bit with h=1e-5 put the truncation error near
1e-10 and the rounding error near 1e-6, so the default tolerance of 1e-6 is
the tightest level this estimator supports; change h and the tolerance
together or not at all. Dropout is excluded (stochastic); checks run with
it forced off.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import rng as rng_mod
from .errors import SizeError
from .heads import Head, HeadConfig, build_head, param_count, with_dropout
from .nn import nll_loss

DEFAULT_H = 1e-5
DEFAULT_TOLERANCE = 1e-6
MAX_CHECK_PARAMS = 5000
_REL_FLOOR = 1e-12


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a - n| / max(|a|, |n|, 1e-12), symmetric and safe at zero."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), _REL_FLOOR)
    return np.abs(analytic - numeric) / denom


def numeric_gradient(
    f: Callable[[], float],
    params: Sequence[np.ndarray],
    h: float = DEFAULT_H,
) -> list[np.ndarray]:
    """Central-difference gradient of f() w.r.t. every coordinate of params.

    Parameters are perturbed in place and restored bit-exactly afterward.
    """
    grads = []
    for p in params:
        g = np.zeros(p.shape, dtype=np.float64)
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.shape[0]):
            orig = flat_p[i]
            flat_p[i] = orig + h
            f_plus = f()
            flat_p[i] = orig - h
            f_minus = f()
            flat_p[i] = orig
            flat_g[i] = (f_plus - f_minus) / (2.0 * h)
        grads.append(g)
    return grads


@dataclass
class ParamCheck:
    """Per-parameter-tensor comparison of analytic vs numeric gradients."""

    name: str
    shape: tuple
    max_rel_err: float
    mean_rel_err: float
    worst_index: int
    analytic_at_worst: float
    numeric_at_worst: float


@dataclass
class GradReport:
    """Full-head gradient check outcome against a tolerance."""

    checks: list[ParamCheck]
    tolerance: float
    h: float

    @property
    def max_rel_err(self) -> float:
        return max(c.max_rel_err for c in self.checks)

    @property
    def worst(self) -> tuple[str, int]:
        c = max(self.checks, key=lambda c: c.max_rel_err)
        return c.name, c.worst_index

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance

    def format_table(self) -> str:
        rows = [("parameter", "shape", "max_rel_err", "mean_rel_err", "worst_idx")]
        for c in self.checks:
            rows.append(
                (
                    c.name,
                    "x".join(str(s) for s in c.shape),
                    f"{c.max_rel_err:.3e}",
                    f"{c.mean_rel_err:.3e}",
                    str(c.worst_index),
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in rows]
        name, idx = self.worst
        lines.append(
            f"max {self.max_rel_err:.3e} at {name}[{idx}] vs tolerance {self.tolerance:g}"
            f" -> {'PASS' if self.passed else 'FAIL'}"
        )
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        lines = ["parameter,shape,max_rel_err,mean_rel_err,worst_index"]
        for c in self.checks:
            shape = "x".join(str(s) for s in c.shape)
            lines.append(
                f"{c.name},{shape},{c.max_rel_err!r},{c.mean_rel_err!r},{c.worst_index}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def check_gradients(
    head: Head,
    x: np.ndarray,
    labels: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    h: float = DEFAULT_H,
) -> GradReport:
    """Compare a head's backward pass against central differences.

    The head must be float64 with dropout probability 0. Its parameters are
    left bit-exactly unchanged; gradient buffers hold the analytic pass.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    drop_rng = rng_mod.dropout_rng(0)

    head.set_mode("train")
    head.zero_grads()
    loss, grad_logits = nll_loss(head.forward(x, drop_rng), labels)
    head.backward(grad_logits)

    names, params, analytic = [], [], []
    for lyr_name, lyr in zip(head.layer_names(), head.layers()):
        names.extend([f"{lyr_name}.W", f"{lyr_name}.b"])
        params.extend([lyr.W, lyr.b])
        analytic.extend([lyr.dW.copy(), lyr.db.copy()])

    head.set_mode("eval")  # numeric evals: deterministic, no rng needed

    def f() -> float:
        return nll_loss(head.forward(x), labels)[0]

    numeric = numeric_gradient(f, params, h=h)

    checks = []
    for name, a, n in zip(names, analytic, numeric):
        rel = relative_error(a.astype(np.float64), n)
        worst = int(np.argmax(rel))
        checks.append(
            ParamCheck(
                name=name,
                shape=tuple(a.shape),
                max_rel_err=float(rel.reshape(-1)[worst]),
                mean_rel_err=float(rel.mean()),
                worst_index=worst,
                analytic_at_worst=float(a.reshape(-1)[worst]),
                numeric_at_worst=float(n.reshape(-1)[worst]),
            )
        )
    return GradReport(checks=checks, tolerance=tolerance, h=h)


def check_head(
    config: HeadConfig,
    batch: tuple[np.ndarray, np.ndarray],
    tolerance: float = DEFAULT_TOLERANCE,
    h: float = DEFAULT_H,
    seed: int = 0,
    max_params: int = MAX_CHECK_PARAMS,
) -> GradReport:
    """Build a float64 head (dropout off) and gradient-check every parameter.

    Refuses configurations above max_params: the numeric pass costs two full
    forwards per coordinate and large heads would take hours by accident.

    Biases are nudged to small random nonzero values after the usual
    zero-bias init. With zero biases, a batch row that dies entirely in one
    layer makes the next layer's pre-activations exactly 0, and the loss is
    not differentiable at the ReLU kink: the analytic subgradient (0 by
    convention) and the central difference (the one-sided slope) disagree
    there no matter how correct the backward pass is. Nonzero biases keep
    the check away from kinks without touching the code under test.
    """
    cfg = with_dropout(config, 0.0)
    total = param_count(cfg)
    if total > max_params:
        raise SizeError(
            f"config has {total} parameters, above the gradient-check limit of "
            f"{max_params}; use smaller dims"
        )
    rng = rng_mod.init_rng(seed)
    head = build_head(cfg, rng, dtype=np.float64)
    for lyr in head.layers():
        lyr.b[...] = rng.uniform(-0.1, 0.1, size=lyr.b.shape)
    x, labels = batch
    return check_gradients(head, x, labels, tolerance=tolerance, h=h)
