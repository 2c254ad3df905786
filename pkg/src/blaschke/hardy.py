"""Finite sections of Toeplitz and composition operators on H^2.

Row and column ``k`` of every matrix stand for the monomial ``z^k``,
``k = 0..N-1``. Identity checks compare products of finite sections on a
leading block small enough that truncation cannot reach it; see
:func:`block_size`.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .core import FiniteBlaschkeProduct, boundary_derivative_modulus, evaluate
from .errors import DomainError, NearBoundaryWarning
from .transfer import (
    SymbolFunction,
    _is_pow2,
    aleksandrov_grid,
    grid_nodes,
    tm_basis,
)

MIN_CUTOFF = 8
MAX_SAMPLE_GRID = 2 ** 16
TAIL_TARGET = 1e-12
POWER_ITERATIONS = 30
_COLUMN_CHUNK = 32
# Extremes of |B'| are read off this many circle samples.
_DERIVATIVE_SAMPLES = 4096


@dataclass(frozen=True)
class TruncatedOperator:
    """An ``N x N`` finite section in the monomial basis."""

    entries: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        E = np.asarray(self.entries, dtype=complex)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise DomainError(f"entries must be square, got shape {E.shape}")
        N = E.shape[0]
        if N < MIN_CUTOFF or not _is_pow2(N):
            raise DomainError(f"cutoff must be a power of two >= {MIN_CUTOFF}, got {N}")
        if not np.all(np.isfinite(E)):
            raise DomainError("operator entries must be finite")
        if E.flags.writeable:
            E = E.copy()
            E.setflags(write=False)
        object.__setattr__(self, "entries", E)

    @property
    def cutoff(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        rhs = other.entries if isinstance(other, TruncatedOperator) else other
        return self.entries @ rhs

    @property
    def H(self) -> np.ndarray:
        return self.entries.conj().T


def _check_cutoff(N: int) -> None:
    if N < MIN_CUTOFF or not _is_pow2(N):
        raise DomainError(f"cutoff must be a power of two >= {MIN_CUTOFF}, got {N}")


def toeplitz_matrix(a: SymbolFunction, N: int) -> TruncatedOperator:
    """``T_a`` with ``entries[j, k] = a_hat(j - k)``."""
    _check_cutoff(N)
    if a.grid_size < 2 * N:
        raise DomainError(
            f"symbol grid {a.grid_size} is too coarse for cutoff {N}; need >= {2 * N}"
        )
    c = a.coeffs
    mid = a.grid_size // 2 - 1  # position of frequency 0
    col = c[mid : mid + N]
    row = c[mid - N + 1 : mid + 1][::-1]
    return TruncatedOperator(scipy.linalg.toeplitz(col, row), {"symbol_grid": a.grid_size})


@functools.lru_cache(maxsize=64)
def derivative_range(B: FiniteBlaschkeProduct):
    """``(min |B'|, max |B'|)`` over the unit circle, sampled densely."""
    d = boundary_derivative_modulus(B, grid_nodes(_DERIVATIVE_SAMPLES))
    # |B'| is a sum of Poisson kernels; local refinement is not worth it here.
    return float(d.min()), float(d.max())


def sample_grid(B: FiniteBlaschkeProduct, N: int):
    """Grid size and tail estimate used to sample powers ``B^k``, ``k < N``.

    Starts at ``2^ceil(log2 max(16 n N, 512, 8 max|B'| N))`` and doubles
    (up to ``2^16``) while ``r^(M - n N)``, with ``r = max |z_k|``, is not
    below ``1e-12``.
    """
    n = B.degree
    r = B.max_zero_modulus
    need = max(16 * n * N, 512, 8.0 * derivative_range(B)[1] * N)
    M = 2 ** math.ceil(math.log2(need))

    def tail(m):
        return 0.0 if r == 0 else r ** (m - n * N)

    if r > 0.95:
        warnings.warn(
            f"max |z_k| = {r:.6f} > 0.95; sampling grid enlarged for slow Fourier decay",
            NearBoundaryWarning,
            stacklevel=3,
        )
    while tail(M) >= TAIL_TARGET and M < MAX_SAMPLE_GRID:
        M *= 2
    return M, tail(M)


def _power_coefficients(base: np.ndarray, N: int, kmax: int, prefactor=None) -> np.ndarray:
    """First ``N`` Fourier coefficients of ``prefactor * base**k``, ``k < kmax``."""
    M = len(base)
    out = np.empty((N, kmax), dtype=complex)
    cur = np.ones(M, dtype=complex) if prefactor is None else np.array(prefactor, dtype=complex)
    for start in range(0, kmax, _COLUMN_CHUNK):
        cols = min(_COLUMN_CHUNK, kmax - start)
        block = np.empty((M, cols), dtype=complex)
        for c in range(cols):
            block[:, c] = cur
            cur = cur * base
        out[:, start : start + cols] = np.fft.fft(block, axis=0)[:N] / M
    return out


@functools.lru_cache(maxsize=32)
def composition_matrix(B: FiniteBlaschkeProduct, N: int) -> TruncatedOperator:
    """``C_B`` with column ``k`` the first ``N`` Taylor coefficients of ``B^k``.

    Monomials ``lam z^n`` are filled in exactly. Otherwise ``B`` is sampled
    on the grid from :func:`sample_grid` and each power is transformed with
    an FFT; ``metadata`` records the grid and the aliasing tail estimate.
    """
    _check_cutoff(N)
    if B.is_monomial:
        n = B.degree
        E = np.zeros((N, N), dtype=complex)
        k = np.arange(0, (N - 1) // n + 1)
        E[n * k, k] = B.lam ** k
        return TruncatedOperator(E, {"grid": None, "tail_estimate": 0.0, "exact": True})
    M, tail = sample_grid(B, N)
    base = evaluate(B, grid_nodes(M))
    E = _power_coefficients(base, N, N)
    return TruncatedOperator(E, {"grid": M, "tail_estimate": tail, "exact": False})


def block_size(B: FiniteBlaschkeProduct, N: int) -> int:
    """Leading block on which finite-section identities are compared.

    ``B^k`` carries its Fourier mass in roughly ``[k min|B'|, k max|B'|]``,
    so column ``k`` survives truncation at ``N`` when ``k max|B'| <= N/2``
    and row ``j`` sees every contributing column when
    ``j <= N min|B'| / 2``. The result is capped at ``N/4``, which is what
    both bounds give for ``z^2``.
    """
    lo, hi = derivative_range(B)
    # the slack keeps exact ratios (z^2: N/4) from rounding down
    b = min(N // 4, int(N / (2.0 * hi) + 1e-9), int(N * lo / 2.0 + 1e-9))
    if b < 1:
        raise DomainError(f"cutoff {N} is too small for this product (empty comparison block)")
    return b


def spectral_norm(A, iters: int = POWER_ITERATIONS, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``A^H A``.

    The start vector comes from a seeded generator, so the estimate is
    deterministic.
    """
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.conj().T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = nw
        v = w / nw
    return float(np.sqrt(est))


def _resolve_block(B, N, block):
    b = block_size(B, N) if block is None else int(block)
    if not 1 <= b <= N:
        raise DomainError(f"block must lie in [1, {N}], got {b}")
    return b


def covariant_defect(
    B: FiniteBlaschkeProduct, a: SymbolFunction, N: int, block: Optional[int] = None
) -> float:
    """``|| (C^* T_a C - T_{A_B(a)}) on the leading block ||``.

    ``a`` must be a trigonometric polynomial of bandwidth at most ``N/4``.
    """
    _check_cutoff(N)
    if a.bandwidth() > N // 4:
        raise DomainError(f"symbol bandwidth {a.bandwidth()} exceeds N/4 = {N // 4}")
    b = _resolve_block(B, N, block)
    sym = a.resample(max(a.grid_size, 2 * N)) if a.grid_size < 2 * N else a
    transferred = aleksandrov_grid(B, sym.resample(max(sym.grid_size, 4 * N, 256)))
    C = composition_matrix(B, N).entries[:, :b]
    lhs = C.conj().T @ toeplitz_matrix(sym, N).entries @ C
    rhs = toeplitz_matrix(transferred, N).entries[:b, :b]
    return spectral_norm(lhs - rhs)


def _isometries(B: FiniteBlaschkeProduct, N: int):
    """``V_i = T_{u_i} C_B`` for the Takenaka-Malmquist functions ``u_i``."""
    C = composition_matrix(B, N).entries
    G = max(2 * N, 1024)
    return [toeplitz_matrix(u.as_symbol(G), N).entries @ C for u in tm_basis(B)]


class CuntzDefect(NamedTuple):
    offdiag: float
    completeness: float


def cuntz_defect(B: FiniteBlaschkeProduct, N: int, block: Optional[int] = None) -> CuntzDefect:
    """Defects of ``V_i^* V_j = delta_ij I`` and ``sum_i V_i V_i^* = I``.

    Both are spectral norms on the leading block; ``offdiag`` is the worst
    over all pairs ``(i, j)``, diagonal pairs included.
    """
    _check_cutoff(N)
    if N < 16 * B.degree:
        raise DomainError(f"cutoff must be >= 16 * degree = {16 * B.degree}")
    b = _resolve_block(B, N, block)
    V = _isometries(B, N)
    eye = np.eye(b)
    off = 0.0
    for i, Vi in enumerate(V):
        for j, Vj in enumerate(V):
            G = Vi[:, :b].conj().T @ Vj[:, :b]
            off = max(off, spectral_norm(G - eye if i == j else G))
    S = sum(Vi[:b, :] @ Vi[:b, :].conj().T for Vi in V)
    return CuntzDefect(off, spectral_norm(S - eye))


def isometry_column_defect(B: FiniteBlaschkeProduct, N: int, block: Optional[int] = None) -> float:
    """``max | ||V_i e_k|| - 1 |`` over ``i`` and columns ``k`` in the leading block."""
    _check_cutoff(N)
    b = _resolve_block(B, N, block)
    return float(max(np.max(np.abs(np.linalg.norm(Vi[:, :b], axis=0) - 1.0)) for Vi in _isometries(B, N)))


def h2_basis_gram_defect(B: FiniteBlaschkeProduct, N: int, kmax: int) -> float:
    """``max |Gram - I|`` for the vectors ``u_i B^k``, ``k <= kmax``, truncated at ``N``."""
    _check_cutoff(N)
    n = B.degree
    if kmax < 0 or n * (kmax + 1) > N // 2:
        raise DomainError(f"need degree * (kmax + 1) <= N/2, got {n} * {kmax + 1} > {N // 2}")
    M, _ = sample_grid(B, N)
    nodes = grid_nodes(M)
    base = evaluate(B, nodes)
    cols = [_power_coefficients(base, N, kmax + 1, prefactor=u(nodes)) for u in tm_basis(B)]
    V = np.concatenate(cols, axis=1)
    G = V.conj().T @ V
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))
