"""Aleksandrov transfer operator, the bimodule inner product, and the
Takenaka-Malmquist basis.

For a Blaschke product B the Aleksandrov-Clark measure at a unimodular
``w`` is a sum of point masses on the fiber ``B^{-1}(w)`` with weights
``1 / |B'|``, so the transfer operator acts by

    A_B(a)(w) = sum_{z in B^{-1}(w)} a(z) / |B'(z)|.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import (
    CIRCLE_TOL,
    FiniteBlaschkeProduct,
    boundary_derivative_modulus,
    evaluate,
)
from .errors import DomainError
from .roots import preimage_points, preimages

MIN_GRID = 64
DEFAULT_GRID = 256
MAX_ADAPTIVE_GRID = 4096


def _is_pow2(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


class SymbolFunction:
    """A function on the unit circle held by its samples on a uniform grid.

    The grid is ``zeta_j = exp(2 pi i j / M)`` with ``M`` a power of two.
    Fourier coefficients ``a_hat(k)`` for ``-M/2 < k <= M/2`` come from one
    FFT and are cached. Off-grid values use the trigonometric interpolant,
    with the Nyquist term split evenly between ``z^{M/2}`` and ``z^{-M/2}``.
    """

    __slots__ = ("_samples", "_coeffs")

    def __init__(self, samples):
        s = np.array(samples, dtype=complex)
        if s.ndim != 1 or not _is_pow2(len(s)) or len(s) < 2:
            raise DomainError(f"grid size must be a power of two, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise DomainError("symbol samples must be finite")
        s.setflags(write=False)
        self._samples = s
        self._coeffs = None

    # constructors

    @classmethod
    def from_callable(cls, f: Callable, grid_size: int) -> "SymbolFunction":
        return cls(f(grid_nodes(grid_size)))

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[int, complex], grid_size: int) -> "SymbolFunction":
        """Trigonometric polynomial ``sum_k coeffs[k] z^k`` on a grid."""
        M = grid_size
        full = np.zeros(M, dtype=complex)
        for k, v in coeffs.items():
            if not -M // 2 < k <= M // 2:
                raise DomainError(f"frequency {k} does not fit a grid of {M}")
            full[k % M] = v
        out = cls(np.fft.ifft(full) * M)
        out._coeffs = _freeze(_centered(full))
        return out

    @classmethod
    def monomial(cls, k: int, grid_size: int) -> "SymbolFunction":
        """``e_k(z) = z^k``."""
        return cls.from_coefficients({k: 1.0}, grid_size)

    @classmethod
    def constant(cls, c: complex, grid_size: int) -> "SymbolFunction":
        return cls.from_coefficients({0: c}, grid_size)

    # data

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def grid_size(self) -> int:
        return len(self._samples)

    @property
    def nodes(self) -> np.ndarray:
        return grid_nodes(self.grid_size)

    @property
    def frequencies(self) -> np.ndarray:
        M = self.grid_size
        return np.arange(-M // 2 + 1, M // 2 + 1)

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficients ordered by :attr:`frequencies`."""
        if self._coeffs is None:
            self._coeffs = _freeze(_centered(np.fft.fft(self._samples) / self.grid_size))
        return self._coeffs

    def coeff(self, k: int) -> complex:
        M = self.grid_size
        if not -M // 2 < k <= M // 2:
            return 0j
        return complex(self.coeffs[k + M // 2 - 1])

    def bandwidth(self, rel_tol: float = 1e-12) -> int:
        """Largest ``|k|`` whose coefficient exceeds ``rel_tol * max``."""
        c = np.abs(self.coeffs)
        if c.max() == 0.0:
            return 0
        return int(np.max(np.abs(self.frequencies[c > rel_tol * c.max()])))

    # algebra

    def __call__(self, z):
        """Trigonometric interpolant at points ``z`` of the circle."""
        zz = np.asarray(z, dtype=complex)
        M = self.grid_size
        c = np.concatenate([[0.5 * self.coeffs[-1]], self.coeffs])
        c[-1] *= 0.5
        # c now runs over k = -M/2 .. M/2; Horner in z, then shift by z^{-M/2}.
        out = npoly.polyval(zz, c) * zz ** (-(M // 2))
        return out if out.ndim else complex(out)

    def conj(self) -> "SymbolFunction":
        """Complex conjugate; coefficients map exactly to ``conj(a_hat(-k))``."""
        out = SymbolFunction(np.conj(self._samples))
        c = self.coeffs
        # centered index i holds frequency i - M/2 + 1; -k sits at M - 2 - i,
        # and the Nyquist term is its own mirror.
        flipped = np.concatenate([np.conj(c[-2::-1]), np.conj(c[-1:])])
        out._coeffs = _freeze(flipped)
        return out

    def _check(self, other: "SymbolFunction"):
        if other.grid_size != self.grid_size:
            raise DomainError(f"grid mismatch: {self.grid_size} vs {other.grid_size}")

    def __mul__(self, other):
        if isinstance(other, SymbolFunction):
            self._check(other)
            return SymbolFunction(self._samples * other._samples)
        return SymbolFunction(self._samples * other)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, SymbolFunction):
            self._check(other)
            return SymbolFunction(self._samples + other._samples)
        return SymbolFunction(self._samples + other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def resample(self, grid_size: int) -> "SymbolFunction":
        """Same trigonometric polynomial on another grid (zero-pad or truncate)."""
        M = self.grid_size
        coeffs = {int(k): v for k, v in zip(self.frequencies, self.coeffs)}
        if grid_size < M:
            coeffs = {k: v for k, v in coeffs.items() if -grid_size // 2 < k < grid_size // 2}
        elif grid_size > M and coeffs.get(M // 2):
            nyq = coeffs.pop(M // 2)
            coeffs[M // 2] = coeffs[-M // 2] = 0.5 * nyq
        return SymbolFunction.from_coefficients(coeffs, grid_size)

    def __repr__(self):
        return f"SymbolFunction(grid_size={self.grid_size})"


def _centered(fft_coeffs: np.ndarray) -> np.ndarray:
    M = len(fft_coeffs)
    return np.concatenate([fft_coeffs[M // 2 + 1 :], fft_coeffs[: M // 2 + 1]])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=32)
def _nodes(M: int) -> np.ndarray:
    return _freeze(np.exp(2j * np.pi * np.arange(M) / M))


def grid_nodes(grid_size: int) -> np.ndarray:
    """``exp(2 pi i j / M)`` for ``j = 0..M-1``."""
    if not _is_pow2(grid_size):
        raise DomainError(f"grid size must be a power of two, got {grid_size}")
    return _nodes(grid_size)


Symbol = Union[SymbolFunction, Callable]


# --- transfer operator ---------------------------------------------------------


@functools.lru_cache(maxsize=64)
def grid_fibers(B: FiniteBlaschkeProduct, grid_size: int):
    """Fibers over every grid node with their Aleksandrov-Clark weights.

    Returns read-only arrays ``(points, weights)`` of shape ``(M, n)``.
    """
    pts = preimage_points(B, grid_nodes(grid_size))
    weights = 1.0 / boundary_derivative_modulus(B, pts)
    return _freeze(pts), _freeze(weights)


def aleksandrov(B: FiniteBlaschkeProduct, a: Symbol, w: complex) -> complex:
    """``A_B(a)(w) = sum_{z in B^{-1}(w)} a(z) / |B'(z)|`` for ``|w| = 1``."""
    if abs(abs(w) - 1.0) > CIRCLE_TOL:
        raise DomainError("the transfer operator is evaluated on the unit circle")
    fib = preimages(B, w)
    vals = np.asarray(a(fib.points), dtype=complex)
    return complex(np.sum(vals / boundary_derivative_modulus(B, fib.points)))


def aleksandrov_grid(
    B: FiniteBlaschkeProduct, a: Symbol, grid_size: Optional[int] = None
) -> SymbolFunction:
    """Apply the transfer operator at every node of the grid.

    For a :class:`SymbolFunction` the output shares its grid and values at
    fiber points come from its trigonometric interpolant. A plain callable
    needs an explicit ``grid_size``.
    """
    if isinstance(a, SymbolFunction):
        grid_size = a.grid_size if grid_size is None else grid_size
        if grid_size != a.grid_size:
            raise DomainError("grid_size disagrees with the symbol's grid")
    elif grid_size is None:
        raise DomainError("a callable symbol needs an explicit grid_size")
    if grid_size < MIN_GRID:
        raise DomainError(f"grid size must be >= {MIN_GRID}")
    pts, weights = grid_fibers(B, grid_size)
    vals = np.asarray(a(pts), dtype=complex)
    return SymbolFunction(np.sum(vals * weights, axis=1))


def poisson_kernel(center: complex, zeta) -> np.ndarray:
    """``(1 - |c|^2) / |zeta - c|^2``."""
    return (1.0 - abs(center) ** 2) / np.abs(np.asarray(zeta) - center) ** 2


def poisson_mass_residual(B: FiniteBlaschkeProduct, grid_size: int = DEFAULT_GRID) -> float:
    """Sup-distance between ``A_B(1)`` and the Poisson kernel at ``B(0)``.

    The kernel is the total mass of the Aleksandrov-Clark measure, by the
    Herglotz representation evaluated at the origin.
    """
    one = SymbolFunction.constant(1.0, grid_size)
    got = aleksandrov_grid(B, one).samples
    want = poisson_kernel(complex(evaluate(B, 0.0)), grid_nodes(grid_size))
    return float(np.max(np.abs(got - want)))


def xr_inner(B: FiniteBlaschkeProduct, xi: SymbolFunction, eta: SymbolFunction) -> SymbolFunction:
    """Bimodule inner product ``<xi, eta> = A_B(conj(xi) eta)``."""
    if xi.grid_size != eta.grid_size:
        raise DomainError(f"grid mismatch: {xi.grid_size} vs {eta.grid_size}")
    return aleksandrov_grid(B, xi.conj() * eta)


def xr_norm(B: FiniteBlaschkeProduct, xi: Symbol, grid_size: Optional[int] = None) -> float:
    """``sup_w A_B(|xi|^2)(w)^(1/2)`` over the grid."""
    if isinstance(xi, SymbolFunction):
        grid_size = xi.grid_size
    pts, weights = grid_fibers(B, grid_size)
    return float(np.sqrt(np.max(np.sum(np.abs(xi(pts)) ** 2 * weights, axis=1))))


# --- Takenaka-Malmquist basis -------------------------------------------------


@dataclass(frozen=True)
class TMFunction:
    """``u_i(z) = sqrt(1 - |z_i|^2) / (1 - conj(z_i) z) * prod_{k<i} b_k(z)``."""

    zero: complex
    previous: tuple

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        a = self.zero
        out = np.sqrt(1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * zz)
        for b in self.previous:
            out = out * (zz - b) / (1.0 - np.conj(b) * zz)
        return out if out.ndim else complex(out)

    def as_symbol(self, grid_size: int) -> SymbolFunction:
        return SymbolFunction.from_callable(self, grid_size)


@dataclass(frozen=True)
class TMBasis:
    functions: tuple
    source: FiniteBlaschkeProduct

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    def __iter__(self):
        return iter(self.functions)

    def evaluate_all(self, z) -> np.ndarray:
        """Stack ``u_1(z), ..., u_n(z)`` along a new last axis."""
        return np.stack([u(z) for u in self.functions], axis=-1)


def tm_basis(B: FiniteBlaschkeProduct) -> TMBasis:
    zs = B.zeros
    return TMBasis(tuple(TMFunction(zs[i], zs[:i]) for i in range(len(zs))), B)


def xr_gram(B: FiniteBlaschkeProduct, functions: Sequence[Callable], grid_size: int) -> np.ndarray:
    """``G[j, p, q] = <f_p, f_q>(w_j)`` for every grid node ``w_j``.

    Functions are evaluated in closed form at the fiber points, so no
    interpolation error enters.
    """
    pts, weights = grid_fibers(B, grid_size)
    U = np.stack([np.asarray(f(pts), dtype=complex) for f in functions], axis=-1)
    return np.einsum("jkp,jkq,jk->jpq", U.conj(), U, weights)


def _orthonormality_defect(B, grid_size):
    if grid_size < MIN_GRID:
        raise DomainError(f"grid size must be >= {MIN_GRID}")
    G = xr_gram(B, tm_basis(B).functions, grid_size)
    return float(np.max(np.abs(G - np.eye(B.degree))))


def tm_orthonormality_defect(B: FiniteBlaschkeProduct, grid_size: Optional[int] = DEFAULT_GRID) -> float:
    """``max_{w, i, j} |<u_i, u_j>(w) - delta_ij|`` over the grid.

    With ``grid_size=None`` the grid starts at 256 and doubles until two
    consecutive defects agree within a factor of two (at most 4096).
    """
    if grid_size is not None:
        return _orthonormality_defect(B, grid_size)
    M = DEFAULT_GRID
    prev = _orthonormality_defect(B, M)
    while M < MAX_ADAPTIVE_GRID:
        M *= 2
        cur = _orthonormality_defect(B, M)
        if cur <= 2.0 * prev and prev <= 2.0 * cur:
            return max(cur, prev)
        prev = cur
    return prev
