"""Dense complex linear algebra: Hermitian eigendecomposition, unitary
matrix exponentials, spectral norms and Kronecker sums.

Matrices are plain square ``numpy.ndarray`` values of dtype complex128.
All functions are pure and deterministic; nothing here mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionOverflow, NonFinite, NonHermitian

__all__ = [
    "EigenSystem",
    "hermitian_eig",
    "expm_hermitian",
    "spectral_norm",
    "kron_sum",
    "hermiticity_defect",
]

# Accepted relative distance between a matrix and its adjoint. Checked with
# Frobenius norms: the gate only needs to separate round-off asymmetry
# (~1e-15) from genuinely non-Hermitian input, and Frobenius keeps it O(n^2).
HERMITICITY_RTOL = 1e-10

# Default cap on the product dimension of a Kronecker sum.
KRON_DIM_CAP = 4096


def _as_square(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFinite("matrix contains NaN or Inf entries")
    return arr


def hermiticity_defect(matrix) -> float:
    """Frobenius distance to the adjoint, relative to the matrix norm."""
    arr = np.asarray(matrix)
    scale = np.linalg.norm(arr)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(arr - arr.conj().T) / scale)


def _require_hermitian(arr: np.ndarray, rtol: float = HERMITICITY_RTOL) -> None:
    defect = hermiticity_defect(arr)
    if defect > rtol:
        raise NonHermitian(f"relative Hermiticity defect {defect:.3e} exceeds {rtol:.1e}")


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` is real and sorted ascending; ``eigenvectors`` holds the
    corresponding orthonormal eigenvectors as columns, so that
    ``M = V @ diag(w) @ V.conj().T``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(matrix) -> EigenSystem:
    """Eigendecompose a Hermitian matrix, eigenvalues ascending.

    Raises NonHermitian when the input is not Hermitian within
    ``HERMITICITY_RTOL`` and NonFinite on NaN/Inf entries.
    """
    arr = _as_square(matrix)
    _require_hermitian(arr)
    w, v = np.linalg.eigh(arr)
    return EigenSystem(eigenvalues=w, eigenvectors=v)


def expm_hermitian(matrix, theta: float) -> np.ndarray:
    """Unitary exponential ``exp(i * theta * M)`` of a Hermitian matrix M.

    Computed through the full eigendecomposition, which keeps the result
    unitary to round-off for every angle.
    """
    eig = hermitian_eig(matrix)
    phases = np.exp(1j * theta * eig.eigenvalues)
    v = eig.eigenvectors
    return (v * phases) @ v.conj().T


def spectral_norm(matrix) -> float:
    """Largest singular value (the l2 -> l2 operator norm)."""
    arr = _as_square(matrix)
    if arr.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False)[0])


def kron_sum(blocks, cap: int = KRON_DIM_CAP) -> np.ndarray:
    """Kronecker sum ``sum_j I (x) ... (x) block_j (x) ... (x) I``.

    ``block_j`` sits in slot j of a d-fold tensor product, d = len(blocks).
    Raises DimensionOverflow when the product dimension exceeds ``cap``.
    """
    mats = [_as_square(b) for b in blocks]
    if not mats:
        raise ValueError("kron_sum needs at least one block")
    dims = [m.shape[0] for m in mats]
    total = math.prod(dims)
    if total > cap:
        raise DimensionOverflow(f"product dimension {total} exceeds cap {cap}")
    out = np.zeros((total, total), dtype=np.complex128)
    for j, block in enumerate(mats):
        left = math.prod(dims[:j]) if j else 1
        right = math.prod(dims[j + 1:]) if j + 1 < len(dims) else 1
        out += np.kron(np.kron(np.eye(left), block), np.eye(right))
    return out
