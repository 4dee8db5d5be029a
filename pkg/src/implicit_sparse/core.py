"""Minimal dense linear algebra and deterministic randomness.

Vectors and matrices are float64 numpy arrays (1-D and row-major 2-D
respectively). Randomness goes through :class:`SeededRng`, a thin wrapper
around numpy's counter-based Philox generator keyed by (seed, stream), so
that any draw sequence is reproducible independently of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "SeededRng",
    "as_matrix",
    "as_vector",
    "hadamard",
    "inf_norm",
    "mat_apply",
    "mat_t_apply",
]


def as_vector(data) -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    v = np.asarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size and not np.all(np.isfinite(v)):
        raise DimensionError("vector contains non-finite entries")
    return v


def as_matrix(data) -> np.ndarray:
    """Coerce to a row-major 2-D float64 array, rejecting non-finite entries."""
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise DimensionError("matrix contains non-finite entries")
    return m


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coordinate-wise product of two equal-length vectors."""
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    return a * b

def mat_apply(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Matrix-vector product, length = number of rows."""
    if x.ndim != 2 or w.ndim != 1 or x.shape[1] != w.shape[0]:
        raise DimensionError(
            f"cannot apply {getattr(x, 'shape', '?')} to vector of shape {getattr(w, 'shape', '?')}"
        )
    return x @ w


def mat_t_apply(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Transpose-matrix-vector product, length = number of columns."""
    if x.ndim != 2 or r.ndim != 1 or x.shape[0] != r.shape[0]:
        raise DimensionError(
            f"cannot apply transpose of {getattr(x, 'shape', '?')} to vector of shape {getattr(r, 'shape', '?')}"
        )
    return x.T @ r


def inf_norm(v: np.ndarray) -> float:
    """Max absolute entry; 0 for an empty vector (empty supports do occur)."""
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


@dataclass(frozen=True)
class SeededRng:
    """A reproducible random stream keyed by (seed, stream).

    Identical (seed, stream) pairs always yield bit-identical draw
    sequences; distinct streams are statistically independent. Use
    :meth:`child` to derive per-purpose streams (e.g. design vs noise
    within one trial) without coordinating consumption order.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        return np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream], dtype=np.uint64))
        )

    def child(self, offset: int) -> "SeededRng":
        """Derive a related stream; offsets partition the stream space."""
        return SeededRng(self.seed, self.stream * 1024 + offset + 1)
