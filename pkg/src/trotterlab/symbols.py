"""Phase-space symbols on the unit torus and their calculus.

A symbol is a trigonometric polynomial

    a(x, xi) = sum_{|k| <= Kx, |kap| <= Kxi} c_{k,kap} exp(2i pi (k x + kap xi))

stored as its finite coefficient lattice. Products and Poisson brackets are
computed exactly in coefficient space, so every calculus identity below is
exact up to round-off. General (non-polynomial) symbols, such as pullbacks
under a classical flow, are carried as grid samples and truncated back to a
coefficient lattice before quantization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import NonFinite, NotSplit

__all__ = [
    "TorusSymbol",
    "SampledSymbol",
    "constant",
    "cosine_x",
    "cosine_xi",
    "sine_x",
    "sine_xi",
    "harmonic",
    "product",
    "poisson_bracket",
    "sample_symbol",
    "pullback_split_flow",
]

_REALITY_TOL = 1e-12
_ZERO_TOL = 0.0  # coefficients are kept verbatim; nothing is pruned silently


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TorusSymbol:
    """Trigonometric polynomial on the phase-space torus.

    ``coeffs[k + order_x, kap + order_xi]`` is the coefficient of
    ``exp(2i pi (k x + kap xi))``. Both array extents are odd.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] % 2 == 0 or arr.shape[1] % 2 == 0:
            raise ValueError(f"coefficient lattice must have odd extents, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFinite("symbol coefficients contain NaN or Inf")
        object.__setattr__(self, "coeffs", _frozen(arr))

    @property
    def order_x(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def order_xi(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    def coefficient(self, k: int, kap: int) -> complex:
        """Coefficient of exp(2i pi (k x + kap xi)); zero outside the lattice."""
        if abs(k) > self.order_x or abs(kap) > self.order_xi:
            return 0j
        return complex(self.coeffs[k + self.order_x, kap + self.order_xi])

    def evaluate(self, x, xi):
        """Evaluate at (x, xi); broadcasts over array arguments.

        Evaluation is automatically 1-periodic in both variables.
        """
        x = np.asarray(x, dtype=np.float64)
        xi = np.asarray(xi, dtype=np.float64)
        out = np.zeros(np.broadcast(x, xi).shape, dtype=np.complex128)
        kx, kxi = self.order_x, self.order_xi
        for i, j in np.argwhere(self.coeffs != 0):
            k, kap = i - kx, j - kxi
            out = out + self.coeffs[i, j] * np.exp(2j * np.pi * (k * x + kap * xi))
        if out.ndim == 0:
            return complex(out)
        return out

    def dx(self) -> "TorusSymbol":
        """Partial derivative in x (a lattice multiplication)."""
        k = np.arange(-self.order_x, self.order_x + 1)
        return TorusSymbol(self.coeffs * (2j * np.pi * k)[:, None])

    def dxi(self) -> "TorusSymbol":
        """Partial derivative in xi."""
        kap = np.arange(-self.order_xi, self.order_xi + 1)
        return TorusSymbol(self.coeffs * (2j * np.pi * kap)[None, :])

    def is_real(self, tol: float = _REALITY_TOL) -> bool:
        """True when the symbol is real-valued: c_{-k,-kap} = conj(c_{k,kap})."""
        flipped = np.conj(self.coeffs[::-1, ::-1])
        scale = max(np.abs(self.coeffs).max(), 1.0)
        return bool(np.abs(self.coeffs - flipped).max() <= tol * scale)

    def is_x_only(self, tol: float = _REALITY_TOL) -> bool:
        kxi = self.order_xi
        off = np.delete(self.coeffs, kxi, axis=1)
        return off.size == 0 or np.abs(off).max() <= tol

    def is_xi_only(self, tol: float = _REALITY_TOL) -> bool:
        kx = self.order_x
        off = np.delete(self.coeffs, kx, axis=0)
        return off.size == 0 or np.abs(off).max() <= tol

    def sup_abs(self, resolution: int = 4096) -> float:
        """sup |a| over the torus by dense sampling.

        Single-variable symbols are sampled at ``resolution`` points along
        their axis; genuinely mixed symbols on a square lattice capped at
        1024 points per axis (extrema of low-order trigonometric
        polynomials are lattice-commensurate, so this is ample).
        """
        if self.is_x_only():
            grid = np.arange(resolution) / resolution
            return float(np.abs(self.evaluate(grid, 0.0)).max())
        if self.is_xi_only():
            grid = np.arange(resolution) / resolution
            return float(np.abs(self.evaluate(0.0, grid)).max())
        side = min(resolution, 1024)
        grid = np.arange(side) / side
        return float(np.abs(self.evaluate(grid[:, None], grid[None, :])).max())

    def __add__(self, other: "TorusSymbol") -> "TorusSymbol":
        kx = max(self.order_x, other.order_x)
        kxi = max(self.order_xi, other.order_xi)
        return TorusSymbol(_pad(self, kx, kxi) + _pad(other, kx, kxi))

    def __sub__(self, other: "TorusSymbol") -> "TorusSymbol":
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return TorusSymbol(self.coeffs * complex(scalar))

    __rmul__ = __mul__


def _pad(symbol: TorusSymbol, kx: int, kxi: int) -> np.ndarray:
    px, pxi = kx - symbol.order_x, kxi - symbol.order_xi
    return np.pad(symbol.coeffs, ((px, px), (pxi, pxi)))


def constant(value: complex = 1.0) -> TorusSymbol:
    return TorusSymbol(np.array([[value]], dtype=np.complex128))


def harmonic(k: int, kap: int, coefficient: complex = 1.0) -> TorusSymbol:
    """Single Fourier mode coefficient * exp(2i pi (k x + kap xi))."""
    kx, kxi = abs(k), abs(kap)
    coeffs = np.zeros((2 * kx + 1, 2 * kxi + 1), dtype=np.complex128)
    coeffs[k + kx, kap + kxi] = coefficient
    return TorusSymbol(coeffs)


def cosine_x(m: int = 1, amplitude: float = 1.0) -> TorusSymbol:
    """amplitude * cos(2 pi m x)."""
    return harmonic(m, 0, amplitude / 2) + harmonic(-m, 0, amplitude / 2)


def cosine_xi(m: int = 1, amplitude: float = 1.0) -> TorusSymbol:
    """amplitude * cos(2 pi m xi)."""
    return harmonic(0, m, amplitude / 2) + harmonic(0, -m, amplitude / 2)


def sine_x(m: int = 1, amplitude: float = 1.0) -> TorusSymbol:
    """amplitude * sin(2 pi m x)."""
    return harmonic(m, 0, amplitude / 2j) + harmonic(-m, 0, -amplitude / 2j)


def sine_xi(m: int = 1, amplitude: float = 1.0) -> TorusSymbol:
    """amplitude * sin(2 pi m xi)."""
    return harmonic(0, m, amplitude / 2j) + harmonic(0, -m, -amplitude / 2j)


def product(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """Pointwise product; exact coefficient-space convolution."""
    return TorusSymbol(convolve2d(a.coeffs, b.coeffs, mode="full"))


def poisson_bracket(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """{a, b} = da/dxi * db/dx - da/dx * db/dxi, exact in coefficient space."""
    return product(a.dxi(), b.dx()) - product(a.dx(), b.dxi())


@dataclass(frozen=True)
class SampledSymbol:
    """Symbol known through samples values[i, j] = a(i/M, j/M), M a power of two."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected square sample grid, got shape {arr.shape}")
        m = arr.shape[0]
        if m < 2 or m & (m - 1):
            raise ValueError(f"sample resolution must be a power of two >= 2, got {m}")
        if not np.isfinite(arr).all():
            raise NonFinite("samples contain NaN or Inf")
        object.__setattr__(self, "values", _frozen(arr))

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def to_torus_symbol(self, max_order: int | None = None) -> TorusSymbol:
        """Truncated coefficient lattice of the samples.

        The default cutoff M/4 guards against aliasing: coefficients beyond
        half the Nyquist order of the sample grid are discarded.
        """
        m = self.resolution
        order = m // 4 if max_order is None else int(max_order)
        if order < 0 or 2 * order + 1 > m:
            raise ValueError(f"cannot extract order {order} from an {m}x{m} grid")
        spectrum = np.fft.fft2(self.values) / m**2
        idx = np.arange(-order, order + 1) % m
        return TorusSymbol(spectrum[np.ix_(idx, idx)])


def sample_symbol(a: TorusSymbol, resolution: int = 256) -> SampledSymbol:
    """Sample a symbol on the uniform resolution x resolution torus grid."""
    grid = np.arange(resolution) / resolution
    return SampledSymbol(a.evaluate(grid[:, None], grid[None, :]))


def _real_values(arr: np.ndarray, what: str) -> np.ndarray:
    scale = max(np.abs(arr).max(), 1.0)
    if np.abs(arr.imag).max() > 1e-10 * scale:
        raise ValueError(f"{what} must be real-valued")
    return arr.real


def pullback_split_flow(a: TorusSymbol, generator: TorusSymbol, t: float,
                        resolution: int = 256) -> SampledSymbol:
    """Samples of ``a`` composed with the time-t Hamiltonian flow of a split generator.

    For a generator b(x) the flow is (x, xi) -> (x, xi - t b'(x)); for b(xi)
    it is (x, xi) -> (x + t b'(xi), xi). Generators depending on both
    variables are rejected (NotSplit). The flowed points wrap modulo 1
    automatically because ``a`` is evaluated as a 1-periodic polynomial.
    """
    grid = np.arange(resolution) / resolution
    if generator.is_x_only():
        rate = _real_values(np.asarray(generator.dx().evaluate(grid, 0.0)), "generator derivative")
        x = grid[:, None]
        xi = grid[None, :] - t * rate[:, None]
    elif generator.is_xi_only():
        rate = _real_values(np.asarray(generator.dxi().evaluate(0.0, grid)), "generator derivative")
        x = grid[:, None] + t * rate[None, :]
        xi = grid[None, :]
    else:
        raise NotSplit("flow generator must depend on x only or on xi only")
    return SampledSymbol(a.evaluate(x, xi))
