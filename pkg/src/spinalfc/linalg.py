"""Minimal dense-matrix kernel used by every other module.

A "matrix" is a 2-D numpy array, row-major, batch rows x feature columns.
Empty matrices are rejected everywhere. Precision is whatever dtype the
caller builds with: float32 for training, float64 for gradient checking.
Every operation returns a fresh array; callers treat results as immutable.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ShapeError


def matrix(data, dtype=None) -> np.ndarray:
    """Build a validated matrix from nested sequences or an array."""
    m = np.array(data, dtype=dtype, order="C")
    check_matrix(m)
    return m


def check_matrix(m: np.ndarray, name: str = "matrix") -> None:
    """Reject anything that is not a non-empty 2-D array."""
    if not isinstance(m, np.ndarray) or m.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D array, got ndim={getattr(m, 'ndim', None)}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must be non-empty, got shape {m.shape}")


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product; entry (i,j) = sum_k a(i,k)*b(k,j)."""
    check_matrix(a, "a")
    check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def concat_cols(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Horizontally join matrices that share a row count, in list order."""
    if len(parts) == 0:
        raise ShapeError("concat_cols: need at least one part")
    rows = None
    for i, p in enumerate(parts):
        check_matrix(p, f"parts[{i}]")
        if rows is None:
            rows = p.shape[0]
        elif p.shape[0] != rows:
            raise ShapeError(
                f"concat_cols: parts[{i}] has {p.shape[0]} rows, expected {rows}"
            )
    return np.concatenate(parts, axis=1)


def split_cols(m: np.ndarray, widths: Sequence[int]) -> list[np.ndarray]:
    """Inverse of concat_cols: slice back into blocks of the given widths."""
    check_matrix(m)
    if sum(widths) != m.shape[1]:
        raise ShapeError(
            f"split_cols: widths sum to {sum(widths)}, matrix has {m.shape[1]} columns"
        )
    out = []
    offset = 0
    for w in widths:
        out.append(np.ascontiguousarray(m[:, offset : offset + w]))
        offset += w
    return out


def add_row_vector(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Add a length-cols row vector to every row of m."""
    check_matrix(m)
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != m.shape[1]:
        raise ShapeError(
            f"add_row_vector: vector length {v.shape} does not match {m.shape[1]} columns"
        )
    return m + v


def map_elementwise(m: np.ndarray, f: Callable[[float], float]) -> np.ndarray:
    """Apply a scalar function entrywise, preserving dtype."""
    check_matrix(m)
    return np.vectorize(f, otypes=[m.dtype])(m)


def transpose(m: np.ndarray) -> np.ndarray:
    """Row-major transpose copy."""
    check_matrix(m)
    return np.ascontiguousarray(m.T)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of identically shaped matrices."""
    check_matrix(a, "a")
    check_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"hadamard: shapes differ: {a.shape} vs {b.shape}")
    return a * b


def scale(m: np.ndarray, s: float) -> np.ndarray:
    """Multiply every entry by the scalar s."""
    check_matrix(m)
    return m * m.dtype.type(s)
