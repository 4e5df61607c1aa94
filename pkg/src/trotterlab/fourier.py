"""Discrete Fourier transforms and circulant matrices.

Convention (single source of truth for the whole package): the forward
transform is unnormalized,

    (F v)_k = sum_j v_j exp(-2i pi k j / N),

and the inverse carries the 1/N factor. The fast paths are restricted to
power-of-two lengths, which covers every production sweep; a quadratic
fallback handles arbitrary lengths for the higher-level constructors so
that property tests are not limited to powers of two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NonFinite, NonPowerOfTwo

__all__ = [
    "DiagonalKind",
    "FactoredOperator",
    "dft",
    "idft",
    "dft_naive",
    "idft_naive",
    "dft_matrix",
    "dft_cols",
    "idft_cols",
    "circulant",
    "materialize",
    "apply_factored",
]


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyInput("transform of an empty vector")
    if not np.isfinite(arr).all():
        raise NonFinite("vector contains NaN or Inf entries")
    return arr


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def dft(v) -> np.ndarray:
    """Unnormalized forward transform; length must be a power of two."""
    arr = _as_vector(v)
    if not _is_pow2(arr.size):
        raise NonPowerOfTwo(f"fast transform needs a power-of-two length, got {arr.size}")
    return np.fft.fft(arr)


def idft(v) -> np.ndarray:
    """Inverse transform with the 1/N factor; length must be a power of two."""
    arr = _as_vector(v)
    if not _is_pow2(arr.size):
        raise NonPowerOfTwo(f"fast transform needs a power-of-two length, got {arr.size}")
    return np.fft.ifft(arr)


def dft_matrix(n: int) -> np.ndarray:
    """Dense forward-transform matrix of size n."""
    if n < 1:
        raise EmptyInput("transform matrix of size 0")
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n)


def dft_naive(v) -> np.ndarray:
    """Quadratic-cost forward transform valid for any length."""
    arr = _as_vector(v)
    return dft_matrix(arr.size) @ arr


def idft_naive(v) -> np.ndarray:
    """Quadratic-cost inverse transform valid for any length."""
    arr = _as_vector(v)
    return dft_matrix(arr.size).conj().T @ arr / arr.size


def _forward(arr: np.ndarray) -> np.ndarray:
    return np.fft.fft(arr) if _is_pow2(arr.size) else dft_matrix(arr.size) @ arr


def _inverse(arr: np.ndarray) -> np.ndarray:
    if _is_pow2(arr.size):
        return np.fft.ifft(arr)
    return dft_matrix(arr.size).conj().T @ arr / arr.size


def dft_cols(mat: np.ndarray) -> np.ndarray:
    """Forward transform applied to every column (or to a vector)."""
    if _is_pow2(mat.shape[0]):
        return np.fft.fft(mat, axis=0)
    return dft_matrix(mat.shape[0]) @ mat


def idft_cols(mat: np.ndarray) -> np.ndarray:
    """Inverse transform applied to every column (or to a vector)."""
    n = mat.shape[0]
    if _is_pow2(n):
        return np.fft.ifft(mat, axis=0)
    return dft_matrix(n).conj().T @ mat / n


class DiagonalKind(enum.Enum):
    """Basis in which a factored operator is diagonal."""

    POSITION = "position"
    FOURIER = "fourier"


@dataclass(frozen=True)
class FactoredOperator:
    """Operator diagonal either in position space or in the Fourier basis.

    A position-diagonal operator materializes to ``diag(d)``; a
    Fourier-diagonal one to ``F^-1 diag(d) F``. Both admit O(N log N)
    application, which is what makes split propagators cheap.
    """

    kind: DiagonalKind
    diag: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.diag, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise EmptyInput("factored operator needs a nonempty 1-d diagonal")
        if not np.isfinite(arr).all():
            raise NonFinite("diagonal contains NaN or Inf entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "diag", arr)

    @property
    def dim(self) -> int:
        return self.diag.size


def materialize(op: FactoredOperator) -> np.ndarray:
    """Dense matrix of a factored operator."""
    if op.kind is DiagonalKind.POSITION:
        return np.diag(op.diag).astype(np.complex128)
    n = op.dim
    return idft_cols(op.diag[:, None] * dft_matrix(n))


def apply_factored(op: FactoredOperator, v) -> np.ndarray:
    """Apply a factored operator to a vector."""
    arr = _as_vector(v)
    if arr.size != op.dim:
        raise DimensionMismatch(f"operator dim {op.dim} != vector length {arr.size}")
    if op.kind is DiagonalKind.POSITION:
        return op.diag * arr
    return _inverse(op.diag * _forward(arr))


def circulant(first_column) -> np.ndarray:
    """Circulant matrix with the given first column.

    Built as ``F^-1 diag(F c) F``; entry (i, j) equals c[(i - j) mod N].
    """
    col = _as_vector(first_column)
    return materialize(FactoredOperator(DiagonalKind.FOURIER, _forward(col)))
