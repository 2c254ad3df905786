"""Finite Blaschke products: construction, evaluation, derivatives, composition.

A finite Blaschke product of degree n is

    B(z) = lam * prod_k (z - z_k) / (1 - conj(z_k) z),   |lam| = 1, |z_k| < 1.

It maps the open disk into itself and the unit circle onto itself n-to-1.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, NearBoundaryWarning

UNIMODULAR_TOL = 1e-12
ZERO_MARGIN = 1e-12
POLE_TOL = 1e-14
CIRCLE_TOL = 1e-10
NEAR_BOUNDARY_RADIUS = 0.95
MAX_ITERATED_DEGREE = 4096


@dataclass(frozen=True)
class FiniteBlaschkeProduct:
    """Unimodular constant ``lam`` times Blaschke factors at ``zeros``.

    Instances are immutable and hashable, so they can key caches. Zeros are
    kept in input order.
    """

    lam: complex
    zeros: tuple

    def __post_init__(self):
        lam = complex(self.lam)
        zeros = tuple(complex(z) for z in self.zeros)
        if not zeros:
            raise DomainError("a Blaschke product needs at least one zero")
        if abs(abs(lam) - 1.0) > UNIMODULAR_TOL:
            raise DomainError(f"lambda must be unimodular, got |lambda| = {abs(lam)!r}")
        for k, a in enumerate(zeros):
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise DomainError(f"zeros[{k}] is not finite")
            if abs(a) >= 1.0 - ZERO_MARGIN:
                raise DomainError(
                    f"zeros[{k}] = {a!r} has modulus {abs(a)!r}; zeros must lie "
                    "strictly inside the unit disk"
                )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "zeros", zeros)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def zeros_array(self) -> np.ndarray:
        return np.array(self.zeros, dtype=complex)

    @property
    def max_zero_modulus(self) -> float:
        return max(abs(a) for a in self.zeros)

    @property
    def is_monomial(self) -> bool:
        return all(a == 0 for a in self.zeros)

    def __call__(self, z):
        return evaluate(self, z)


def make_blaschke(lam: complex, zeros: Iterable[complex]) -> FiniteBlaschkeProduct:
    """Build and validate a finite Blaschke product.

    Raises :class:`DomainError` for a non-unimodular ``lam``, an empty zero
    list, or any zero with ``|z_k| >= 1 - 1e-12``. Emits
    :class:`NearBoundaryWarning` when some ``|z_k| > 0.95``.
    """
    B = FiniteBlaschkeProduct(lam, tuple(zeros))
    if B.max_zero_modulus > NEAR_BOUNDARY_RADIUS:
        warnings.warn(
            f"max |z_k| = {B.max_zero_modulus:.6f} > {NEAR_BOUNDARY_RADIUS}; "
            "Fourier coefficients downstream decay slowly",
            NearBoundaryWarning,
            stacklevel=2,
        )
    return B


def monomial(n: int, lam: complex = 1.0) -> FiniteBlaschkeProduct:
    """``lam * z**n``."""
    return make_blaschke(lam, [0.0] * n)


def _check_poles(B: FiniteBlaschkeProduct, z: np.ndarray) -> None:
    for a in B.zeros:
        if a != 0 and np.any(np.abs(1.0 - np.conj(a) * z) < POLE_TOL):
            raise DomainError(f"evaluation point too close to the pole 1/conj({a!r})")


def evaluate(B: FiniteBlaschkeProduct, z):
    """Evaluate ``B`` at a scalar or array ``z`` (same shape out)."""
    zz = np.asarray(z, dtype=complex)
    _check_poles(B, zz)
    out = np.full(zz.shape, B.lam, dtype=complex)
    for a in B.zeros:
        out *= (zz - a) / (1.0 - np.conj(a) * zz)
    return out if out.ndim else complex(out)


def taylor_coefficients(B: FiniteBlaschkeProduct, z, order: int) -> np.ndarray:
    """Taylor coefficients ``c_0..c_order`` of ``B`` about each point ``z``.

    Each factor expands in closed form,

        (z0 + h - a) / (d - conj(a) h) = sum_m c_m h^m,   d = 1 - conj(a) z0,

    and the truncated series are multiplied. This stays accurate at and near
    the zeros, where logarithmic differentiation breaks down.

    Returns an array of shape ``(order + 1,) + shape(z)``.
    """
    zz = np.asarray(z, dtype=complex)
    _check_poles(B, zz)
    acc = np.zeros((order + 1,) + zz.shape, dtype=complex)
    acc[0] = B.lam
    fac = np.empty_like(acc)
    for a in B.zeros:
        ac = np.conj(a)
        d = 1.0 - ac * zz
        q = ac / d
        fac[0] = (zz - a) / d
        qpow = np.ones_like(zz)
        for m in range(1, order + 1):
            # c_m = ((z0 - a) q^m + q^(m-1)) / d
            fac[m] = ((zz - a) * qpow * q + qpow) / d
            qpow = qpow * q
        new = np.zeros_like(acc)
        for i in range(order + 1):
            for j in range(order + 1 - i):
                new[i + j] += acc[i] * fac[j]
        acc = new
    return acc


def derivatives(B: FiniteBlaschkeProduct, z, order: int):
    """``[B(z), B'(z), ..., B^(order)(z)]`` as a list."""
    c = taylor_coefficients(B, z, order)
    out = [c[m] * math.factorial(m) for m in range(order + 1)]
    if np.ndim(z) == 0:
        out = [complex(v) for v in out]
    return out


def derivative(B: FiniteBlaschkeProduct, z):
    """``B'(z)`` for a scalar or array ``z``."""
    return derivatives(B, z, 1)[1]


def boundary_derivative_modulus(B: FiniteBlaschkeProduct, zeta):
    """``|B'(zeta)| = sum_k (1 - |z_k|^2) / |zeta - z_k|^2`` for ``|zeta| = 1``.

    The sum is strictly positive: a Blaschke product has no critical points
    on the circle.
    """
    zz = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(np.abs(zz) - 1.0) > CIRCLE_TOL):
        raise DomainError("boundary_derivative_modulus needs points on the unit circle")
    a = B.zeros_array.reshape((-1,) + (1,) * zz.ndim)
    out = np.sum((1.0 - np.abs(a) ** 2) / np.abs(zz - a) ** 2, axis=0)
    return out if out.ndim else float(out)


def compose(B1: FiniteBlaschkeProduct, B2: FiniteBlaschkeProduct) -> FiniteBlaschkeProduct:
    """``B1 o B2`` as a Blaschke product of degree ``deg B1 * deg B2``.

    The new zeros are the B2-preimages of the zeros of B1. The constant is
    fixed by matching values at z = 1, where every factor is unimodular and
    so can neither vanish nor blow up.
    """
    from .roots import preimages_many

    fibers = preimages_many(B2, np.array(B1.zeros, dtype=complex))
    zeros = [complex(p) for f in fibers for p in f.points]
    target = complex(evaluate(B1, evaluate(B2, 1.0)))
    unscaled = complex(evaluate(FiniteBlaschkeProduct(1.0, zeros), 1.0))
    lam = target / unscaled
    return FiniteBlaschkeProduct(lam / abs(lam), tuple(zeros))


def iterate(B: FiniteBlaschkeProduct, m: int) -> FiniteBlaschkeProduct:
    """The ``m``-fold composition ``B o ... o B`` (degree ``n**m``)."""
    if m < 1:
        raise DomainError("iteration count must be >= 1")
    if B.degree ** m > MAX_ITERATED_DEGREE:
        raise DomainError(
            f"degree {B.degree}**{m} exceeds the limit of {MAX_ITERATED_DEGREE}"
        )
    out = B
    for _ in range(m - 1):
        # Pulling back through B keeps every root solve at degree n.
        out = compose(out, B)
    return out


class MoebiusKind(enum.Enum):
    IDENTITY = "Identity"
    ELLIPTIC_FINITE_ORDER = "EllipticFiniteOrder"
    ELLIPTIC_INFINITE_OR_LONG = "EllipticInfiniteOrLong"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"


@dataclass(frozen=True)
class MoebiusReport:
    kind: MoebiusKind
    order: Optional[int]
    rotation_certificate: complex

    @property
    def is_elliptic(self) -> bool:
        return self.kind in (
            MoebiusKind.IDENTITY,
            MoebiusKind.ELLIPTIC_FINITE_ORDER,
            MoebiusKind.ELLIPTIC_INFINITE_OR_LONG,
        )

    def __str__(self):
        if self.kind is MoebiusKind.ELLIPTIC_FINITE_ORDER:
            return f"EllipticFiniteOrder({self.order})"
        return self.kind.value


def moebius_matrix(B: FiniteBlaschkeProduct) -> np.ndarray:
    """Coefficient matrix ``[[lam, -lam a], [-conj(a), 1]]`` of a degree-1 map."""
    if B.degree != 1:
        raise DomainError("moebius_matrix needs a degree-1 Blaschke product")
    a = B.zeros[0]
    return np.array([[B.lam, -B.lam * a], [-np.conj(a), 1.0]], dtype=complex)


def moebius_classify(
    B: FiniteBlaschkeProduct,
    q_max: int = 10_000,
    unit_root_tol: float = 1e-9,
    trace_tol: float = 1e-12,
) -> MoebiusReport:
    """Classify a disk automorphism by the eigenvalue ratio of its matrix.

    For ``lam (z - a) / (1 - conj(a) z)`` the normalized squared trace is
    ``|1 + lam|^2 / (1 - |a|^2)``: below 4 is elliptic, 4 parabolic, above 4
    hyperbolic. The comparison with 4 is done on the closed-form difference
    ``|1 + lam|^2 - 4 (1 - |a|^2)`` to keep small rotations apart from
    parabolic maps. An elliptic map has order ``q`` when the eigenvalue
    ratio ``r`` satisfies ``|r^q - 1| < unit_root_tol`` for some
    ``q <= q_max``.
    """
    if B.degree != 1:
        raise DomainError(f"moebius_classify needs degree 1, got {B.degree}")
    a = B.zeros[0]
    if abs(a) < UNIMODULAR_TOL and abs(B.lam - 1.0) < UNIMODULAR_TOL:
        return MoebiusReport(MoebiusKind.IDENTITY, 1, 1.0 + 0j)

    mu = np.linalg.eigvals(moebius_matrix(B))
    ratio = complex(mu[0] / mu[1])
    disc = abs(1.0 + B.lam) ** 2 - 4.0 * (1.0 - abs(a) ** 2)
    if abs(disc) <= trace_tol:
        return MoebiusReport(MoebiusKind.PARABOLIC, None, ratio)
    if disc > 0:
        return MoebiusReport(MoebiusKind.HYPERBOLIC, None, ratio)

    phi = math.atan2(ratio.imag, ratio.real)
    q = np.arange(1, q_max + 1)
    hits = np.nonzero(2.0 * np.abs(np.sin(q * phi / 2.0)) < unit_root_tol)[0]
    if hits.size:
        return MoebiusReport(MoebiusKind.ELLIPTIC_FINITE_ORDER, int(q[hits[0]]), ratio)
    return MoebiusReport(MoebiusKind.ELLIPTIC_INFINITE_OR_LONG, None, ratio)
