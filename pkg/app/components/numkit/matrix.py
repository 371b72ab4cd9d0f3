"""
Dense Matrix Helpers.

All numeric work in the toolkit runs on 2-D float64 numpy arrays, one sample per row.
This module holds the few guarded primitives the rest of the code builds on: shape-checked
products, finiteness checks, and the seeded generator used for every random draw.

The generator is numpy's PCG64. A uniform draw on [lo, hi) is computed as
`lo + (hi - lo) * u` where `u = (next_uint64 >> 11) * 2**-53` is what
`Generator.random` returns for PCG64, so the stream is pinned by the seed alone.
"""

import numpy as np

from app.errors import ParameterError, ShapeError

Matrix = np.ndarray
Rng = np.random.Generator

DTYPE = np.float64


def make_rng(seed: int) -> Rng:
    """Creates the PCG64-backed generator for a 64-bit unsigned seed."""
    if seed < 0 or seed >= 2 ** 64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(values, name: str = "matrix") -> Matrix:
    """
    Converts array-like input to a C-contiguous float64 matrix.

    A 1-D vector is promoted to a single row.

    Raises:
        ShapeError: If the input has more than two dimensions.
    """
    m = np.asarray(values, dtype=DTYPE)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    elif m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    return np.ascontiguousarray(m)


def ensure_finite(m: Matrix, name: str = "matrix") -> Matrix:
    if not np.all(np.isfinite(m)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """
    Shape-checked matrix product.

    Raises:
        ShapeError: If `a.cols != b.rows`; the message names both shapes.
    """
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def random_uniform(rng: Rng, rows: int, cols: int, lo: float, hi: float) -> Matrix:
    """
    Draws a rows x cols matrix with entries i.i.d. uniform on [lo, hi).

    Raises:
        ParameterError: If `lo >= hi` or a dimension is negative.
    """
    if not lo < hi:
        raise ParameterError(f"uniform range requires lo < hi, got lo={lo}, hi={hi}")
    if rows < 0 or cols < 0:
        raise ParameterError(f"dimensions must be non-negative, got {rows}x{cols}")
    u = rng.random((rows, cols))
    return lo + (hi - lo) * u


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=DTYPE)
