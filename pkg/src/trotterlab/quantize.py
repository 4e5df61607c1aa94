"""Discrete Weyl quantization on the torus and semiclassical calculus checks.

For N grid modes the effective Planck constant is h = 1/(2 pi N) and a
torus symbol a quantizes to the N x N matrix

    A[m, j] = sum_{k, l} c(k, j - m - l N) (-1)^(k l) exp(i pi (j + m) k / N),

where c(k, kap) are the symbol's Fourier coefficients. The sums are finite:
k runs over the coefficient lattice and l over the integers with
|j - m - l N| inside it. Real symbols produce Hermitian matrices;
x-only symbols produce position diagonals and xi-only symbols circulants.

The *_remainder functions measure how well the discrete quantization obeys
the standard semiclassical calculus (symbol composition, commutator vs
Poisson bracket, sup-norm bound, conjugation vs classical flow) so the
expected powers of h can be verified by parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse
from .numkit import expm_hermitian, spectral_norm
from .symbols import (
    SampledSymbol,
    TorusSymbol,
    poisson_bracket,
    product,
    pullback_split_flow,
)

__all__ = [
    "QuantizationContext",
    "quantize",
    "quantize_sampled",
    "composition_remainder",
    "commutator_remainder",
    "cv_gap",
    "egorov_remainder",
]


@dataclass(frozen=True)
class QuantizationContext:
    """Number of modes N; the Planck constant h = 1/(2 pi N) is derived."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"need N >= 1, got {self.N}")

    @property
    def h(self) -> float:
        return 1.0 / (2.0 * math.pi * self.N)


def quantize(symbol: TorusSymbol, ctx: QuantizationContext) -> np.ndarray:
    """N x N matrix quantizing a torus symbol.

    The l sum is resolved by direct enumeration of every integer l with
    |j - m - l N| on the coefficient lattice, keeping the code auditable
    against the coordinate formula above.
    """
    n = ctx.N
    kx, kxi = symbol.order_x, symbol.order_xi
    coeffs = symbol.coeffs
    ks = np.arange(-kx, kx + 1)

    # Fold the kap axis once: g[k, delta] = sum_l c(k, delta - l N) (-1)^(k l)
    # for delta = j - m in [-(N-1), N-1].
    deltas = np.arange(-(n - 1), n)
    g = np.zeros((2 * kx + 1, deltas.size), dtype=np.complex128)
    l_min = math.ceil((-(n - 1) - kxi) / n)
    l_max = math.floor(((n - 1) + kxi) / n)
    for l in range(l_min, l_max + 1):
        kap = deltas - l * n
        valid = np.abs(kap) <= kxi
        if not valid.any():
            continue
        cols = kap[valid] + kxi
        sign = np.where((ks % 2 != 0) & (l % 2 != 0), -1.0, 1.0)
        g[:, valid] += sign[:, None] * coeffs[:, cols]

    idx = np.arange(n)
    delta_index = idx[None, :] - idx[:, None] + (n - 1)   # delta = j - m
    out = np.zeros((n, n), dtype=np.complex128)
    for i, k in enumerate(ks):
        row = g[i]
        if not row.any():
            continue
        phase = np.exp(1j * np.pi * k * idx / n)           # e^{i pi k (j+m)/N} split
        out += np.outer(phase, phase) * row[delta_index]
    return out


def quantize_sampled(sampled: SampledSymbol, ctx: QuantizationContext) -> np.ndarray:
    """Quantize a sampled symbol through its truncated coefficient lattice.

    Requires at least 4 N samples per axis so the default M/4 truncation
    keeps every coefficient the quantization can resolve.
    """
    if sampled.resolution < 4 * ctx.N:
        raise GridTooCoarse(
            f"resolution {sampled.resolution} < 4 N = {4 * ctx.N}; refine the sample grid")
    return quantize(sampled.to_torus_symbol(), ctx)


def composition_remainder(a: TorusSymbol, b: TorusSymbol, ctx: QuantizationContext) -> float:
    """Norm defect of the leading composition rule; expected O(h^2).

    Measures || op(a) op(b) - op(a b) - (h / 2i) op({a, b}) ||.
    """
    qa, qb = quantize(a, ctx), quantize(b, ctx)
    leading = quantize(product(a, b), ctx)
    bracket = quantize(poisson_bracket(a, b), ctx)
    return spectral_norm(qa @ qb - leading - (ctx.h / 2j) * bracket)


def commutator_remainder(a: TorusSymbol, b: TorusSymbol, ctx: QuantizationContext) -> float:
    """Norm defect of the commutator formula; expected O(h^3).

    Measures || [op(a), op(b)] - (h / i) op({a, b}) ||.
    """
    qa, qb = quantize(a, ctx), quantize(b, ctx)
    bracket = quantize(poisson_bracket(a, b), ctx)
    return spectral_norm(qa @ qb - qb @ qa - (ctx.h / 1j) * bracket)


def cv_gap(a: TorusSymbol, ctx: QuantizationContext) -> float:
    """Excess of || op(a) || over sup |a|; bounded by C(a) h.

    Negative values simply mean the operator norm sits below the sup norm.
    """
    if not a.is_real():
        raise ValueError("sup-norm gap is defined for real-valued symbols")
    return spectral_norm(quantize(a, ctx)) - a.sup_abs()


def egorov_remainder(a: TorusSymbol, generator: TorusSymbol, t: float,
                     ctx: QuantizationContext, resolution: int | None = None) -> float:
    """Defect of quantum conjugation against the classical flow; expected O(h^2).

    Measures || e^{i t B / h} op(a) e^{-i t B / h} - op(a o phi_t) || where
    B = op(generator) and phi_t is the split generator's Hamiltonian flow.
    The flowed symbol is carried on a sample grid of at least 4 N points
    per axis before truncation and quantization.
    """
    if abs(t) > 1.0:
        raise ValueError(f"|t| <= 1 expected, got {t}")
    m = resolution if resolution is not None else max(256, 4 * ctx.N)
    flowed = pullback_split_flow(a, generator, t, resolution=m)   # NotSplit guards here
    u = expm_hermitian(quantize(generator, ctx), t / ctx.h)
    evolved = u @ quantize(a, ctx) @ u.conj().T
    return spectral_norm(evolved - quantize_sampled(flowed, ctx))
