"""Polynomial roots and their two consumers: preimage fibers and fixed points.

Roots are found by Aberth-Ehrlich simultaneous iteration, vectorized over a
batch of same-degree polynomials so that a whole grid of fibers is solved in
one sweep loop. Clusters left behind by multiple roots are refined by Newton
on the appropriate derivative and merged only when the multiplicity checks
out.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import (
    CIRCLE_TOL,
    FiniteBlaschkeProduct,
    boundary_derivative_modulus,
    derivative,
    evaluate,
)
from .errors import ConvergenceError, DomainError

EPS = np.finfo(float).eps
TRIM_TOL = 1e-14
MAX_SWEEPS = 500
ROOT_RESIDUAL_TOL = 1e-10
FIBER_RESIDUAL_TOL = 1e-9
# Spec'd cluster radius: roots this close are always merged.
MERGE_RADIUS = 1e-6
# Wider radius for candidate clusters; merged only if the multiplicity test passes.
CLUSTER_DETECT_RADIUS = 1e-3
MULTIPLICITY_TOL = 1e-11


@dataclass(frozen=True)
class PolynomialC:
    """Complex polynomial with ascending coefficients.

    Trailing coefficients below ``1e-14`` relative to the largest one are
    trimmed, so ``degree`` is the index of the last significant coefficient.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", _trim(c))

    @classmethod
    def from_roots(cls, roots, leading: complex = 1.0) -> "PolynomialC":
        return cls(leading * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)


def _trim(c: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return c[:1]
    keep = np.nonzero(np.abs(c) > TRIM_TOL * scale)[0]
    return c[: keep[-1] + 1]


def _horner(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Row-wise evaluation: ``c`` is (K, d+1) ascending, ``z`` is (K, m)."""
    acc = np.repeat(c[:, -1:], z.shape[1], axis=1).astype(np.result_type(c, z))
    for k in range(c.shape[1] - 2, -1, -1):
        acc = acc * z + c[:, k : k + 1]
    return acc


def _aberth(c: np.ndarray, max_sweeps: int = MAX_SWEEPS):
    """Aberth-Ehrlich iteration on each row of ``c`` (K, d+1), ascending.

    Rows must have a nonzero constant and leading coefficient. Returns
    ``(roots, converged)`` with roots of shape (K, d).
    """
    K, d1 = c.shape
    d = d1 - 1
    c = c / c[:, -1:]
    dc = c[:, 1:] * np.arange(1, d1)
    absc = np.abs(c)

    # Start on the circle whose radius is the geometric mean of the root
    # moduli; the angular offset breaks the symmetry of real polynomials.
    radius = np.abs(c[:, 0]) ** (1.0 / d)
    angles = 2.0 * np.pi * np.arange(d) / d + 0.4 + 0.1 / d
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    active = np.ones((K, d), dtype=bool)
    eye = np.eye(d, dtype=bool)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_sweeps):
            p = _horner(c, z)
            floor = 4.0 * EPS * _horner(absc, np.abs(z))
            active &= ~(np.abs(p) <= floor)
            if not active.any():
                break
            dp = _horner(dc, z)
            ratio = p / dp
            diff = z[:, :, None] - z[:, None, :]
            inv = np.where(eye, 0.0, 1.0 / np.where(eye, 1.0, diff))
            corr = ratio / (1.0 - ratio * inv.sum(axis=2))
            bad = ~np.isfinite(corr)
            if bad.any():
                # Coincident iterates or a vanishing derivative: nudge off.
                corr = np.where(bad, 1e-3 * (1.0 + np.abs(z)) * np.exp(1j * np.pi / 7), corr)
            z = np.where(active, z - corr, z)
            active &= ~(np.abs(corr) <= 2.0 * EPS * np.abs(z))
    return z, ~active


def _newton_polish(c: np.ndarray, z: np.ndarray, steps: int = 2) -> np.ndarray:
    """Row-wise Newton steps, each kept only where it lowers ``|p|``.

    ``c`` is (K, d+1) ascending and ``z`` is (K, m).
    """
    dc = c[:, 1:] * np.arange(1, c.shape[1])
    best = np.abs(_horner(c, z))
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(steps):
            cand = z - _horner(c, z) / _horner(dc, z)
            r = np.abs(_horner(c, cand))
            better = np.isfinite(cand) & (r < best)
            z = np.where(better, cand, z)
            best = np.where(better, r, best)
    return z


def _groups(z: np.ndarray, radius: float) -> List[List[int]]:
    """Single-linkage groups of points closer than ``radius * max(1, |z|)``."""
    d = len(z)
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(z[:, None] - z[None, :])
    scale = radius * np.maximum(1.0, np.maximum(np.abs(z)[:, None], np.abs(z)[None, :]))
    for i, j in zip(*np.nonzero(np.triu(dist < scale, 1))):
        parent[find(i)] = find(j)
    out = {}
    for i in range(d):
        out.setdefault(find(i), []).append(i)
    return list(out.values())


def _multiple_root(c: np.ndarray, center: complex, m: int) -> Optional[complex]:
    """Refine a suspected m-fold root near ``center``; None if it is not one.

    Newton on the (m-1)-th derivative converges quadratically to an m-fold
    root. The candidate is accepted when all lower derivatives vanish to a
    relative tolerance.
    """
    dm1 = npoly.polyder(c, m - 1)
    dm = npoly.polyder(c, m)
    x = complex(center)
    for _ in range(30):
        den = npoly.polyval(x, dm)
        if den == 0:
            break
        step = npoly.polyval(x, dm1) / den
        x -= step
        if abs(step) <= 2.0 * EPS * max(1.0, abs(x)):
            break
    for k in range(m - 1):
        ck = npoly.polyder(c, k) if k else c
        val = abs(npoly.polyval(x, ck))
        scale = npoly.polyval(abs(x), np.abs(ck))
        if not val <= MULTIPLICITY_TOL * scale:
            return None
    return x


def _resolve_clusters(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = z.copy()
    for grp in _groups(z, CLUSTER_DETECT_RADIUS):
        if len(grp) < 2:
            continue
        root = _multiple_root(c, z[grp].mean(), len(grp))
        if root is not None:
            out[grp] = root
            continue
        for sub in _groups(z[grp], MERGE_RADIUS):
            if len(sub) > 1:
                idx = [grp[i] for i in sub]
                out[idx] = z[idx].mean()
    return out


def _root_residuals(c: np.ndarray, z: np.ndarray):
    """Row-wise ``|p(z)|`` and whether it passes the absolute or relative test."""
    val = np.abs(_horner(c, z))
    absolute = val <= ROOT_RESIDUAL_TOL * np.max(np.abs(c), axis=1, keepdims=True)
    relative = val <= ROOT_RESIDUAL_TOL * _horner(np.abs(c), np.abs(z))
    return val, absolute | relative


def poly_roots_many(polys: Sequence) -> List[np.ndarray]:
    """Roots (with multiplicity) of each polynomial in ``polys``.

    ``polys`` holds ascending coefficient arrays or :class:`PolynomialC`.
    Same-degree polynomials are solved together in one vectorized batch.
    """
    trimmed = []
    for p in polys:
        c = p.coeffs if isinstance(p, PolynomialC) else _trim(np.asarray(p, dtype=complex))
        if len(c) < 2:
            raise DomainError("poly_roots needs degree >= 1")
        trimmed.append(c)

    results: List[Optional[np.ndarray]] = [None] * len(trimmed)
    batches = {}
    for idx, c in enumerate(trimmed):
        nz = np.nonzero(c)[0]
        lead_zeros = int(nz[0])  # exact zero roots are deflated
        batches.setdefault(len(c) - 1 - lead_zeros, []).append((idx, lead_zeros))

    for d, members in batches.items():
        if d == 0:
            for idx, nzero in members:
                results[idx] = np.zeros(nzero, dtype=complex)
            continue
        rows = np.array([trimmed[idx][nzero:] for idx, nzero in members])
        z, _ = _aberth(rows)
        z = _newton_polish(rows, z)
        if d > 1:
            gap = np.abs(z[:, :, None] - z[:, None, :])
            gap[:, np.arange(d), np.arange(d)] = np.inf
            scale = CLUSTER_DETECT_RADIUS * np.maximum(1.0, np.max(np.abs(z), axis=1))
            for r in np.nonzero(gap.min(axis=(1, 2)) < scale)[0]:
                z[r] = _resolve_clusters(rows[r], z[r])
        val, ok = _root_residuals(rows, z)
        if not ok.all():
            worst = float(np.max(val[~ok]))
            raise ConvergenceError(
                f"Aberth iteration did not converge within {MAX_SWEEPS} sweeps "
                f"(worst residual {worst:.3e})",
                residual=worst,
            )
        for r, (idx, nzero) in enumerate(members):
            results[idx] = np.concatenate([np.zeros(nzero, dtype=complex), z[r]])
    return results


def poly_roots(p) -> np.ndarray:
    """All roots of ``p`` with multiplicity (array of length ``degree``).

    Examples
    --------
    >>> sorted(poly_roots([-1, 0, 1]).real)
    [-1.0, 1.0]
    """
    return poly_roots_many([p])[0]


# --- preimage fibers -------------------------------------------------------


@functools.lru_cache(maxsize=256)
def fiber_polynomials(B: FiniteBlaschkeProduct):
    """Ascending coefficients of ``lam prod(z - z_k)`` and ``prod(1 - conj(z_k) z)``.

    ``B(z) = w`` is equivalent to ``P(z) - w Q(z) = 0``.
    """
    a = B.zeros_array
    P = np.array([B.lam], dtype=complex)
    Q = np.array([1.0 + 0j])
    for ak in a:
        # np.convolve keeps exact-zero high coefficients (polymul trims them).
        P = np.convolve(P, [-ak, 1.0])
        Q = np.convolve(Q, [1.0, -np.conj(ak)])
    P.setflags(write=False)
    Q.setflags(write=False)
    return P, Q


@dataclass(frozen=True)
class FiberReport:
    """Preimages ``B^{-1}(target)`` with multiplicity and mapping residuals."""

    target: complex
    points: np.ndarray
    residuals: np.ndarray
    note: Optional[str] = None

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    def __len__(self):
        return len(self.points)


def _circle_polish(B: FiniteBlaschkeProduct, z: np.ndarray, w: np.ndarray, steps: int = 4):
    """Angle-only Newton onto the circle: solve ``arg B(e^{it}) = arg w``.

    On the circle ``d/dt arg B(e^{it}) = |B'(e^{it})| > 0``, so the 1-D
    Newton step is the phase error divided by the boundary derivative.
    """
    theta = np.angle(z)
    for _ in range(steps):
        zeta = np.exp(1j * theta)
        err = np.angle(evaluate(B, zeta) * np.conj(w))
        theta = theta - err / boundary_derivative_modulus(B, zeta)
        if np.max(np.abs(err), initial=0.0) < 1e-15:
            break
    return np.exp(1j * theta)


def preimage_points(B: FiniteBlaschkeProduct, ws) -> np.ndarray:
    """Fibers over every target in ``ws`` as a (K, n) array.

    Targets must lie in the closed disk, where the fiber polynomial never
    loses degree. Unimodular targets get their points polished onto the
    circle.
    """
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    if np.any(np.abs(ws) > 1.0 + CIRCLE_TOL):
        raise DomainError("preimage_points needs targets in the closed unit disk")
    P, Q = fiber_polynomials(B)
    rows = P[None, :] - ws[:, None] * Q[None, :]
    pts = np.array(poly_roots_many(list(rows)))
    on_circle = np.abs(np.abs(ws) - 1.0) <= CIRCLE_TOL
    if on_circle.any():
        wc = ws[on_circle] / np.abs(ws[on_circle])
        pts[on_circle] = _circle_polish(B, pts[on_circle], wc[:, None])
    return pts


def preimages_many(B: FiniteBlaschkeProduct, ws) -> List[FiberReport]:
    """:func:`preimages` for each target in ``ws``."""
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    inside = np.abs(ws) <= 1.0 + CIRCLE_TOL
    reports: List[Optional[FiberReport]] = [None] * len(ws)
    if inside.any():
        pts = preimage_points(B, ws[inside])
        for row, k in zip(pts, np.nonzero(inside)[0]):
            reports[k] = _report(B, ws[k], row, None)
    P, Q = fiber_polynomials(B)
    for k in np.nonzero(~inside)[0]:
        c = _trim(P - ws[k] * Q)
        row = poly_roots(c) if len(c) > 1 else np.zeros(0, dtype=complex)
        note = None
        if len(row) < B.degree:
            note = f"{B.degree - len(row)} preimage(s) at infinity excluded"
        reports[k] = _report(B, ws[k], row, note)
    return reports


def _report(B, w, pts, note) -> FiberReport:
    res = np.abs(evaluate(B, pts) - w)
    worst = float(np.max(res)) if res.size else 0.0
    if worst > FIBER_RESIDUAL_TOL * max(1.0, abs(w)):
        raise ConvergenceError(f"fiber over {w!r} has residual {worst:.3e}", residual=worst)
    return FiberReport(complex(w), pts, res, note)


def preimages(B: FiniteBlaschkeProduct, w: complex) -> FiberReport:
    """Solve ``B(z) = w``: ``lam prod(z - z_k) - w prod(1 - conj(z_k) z) = 0``.

    Returns all ``n`` preimages with multiplicity. For ``|w| = 1`` every
    point lies on the circle to within rounding.
    """
    return preimages_many(B, [w])[0]


# --- circle lift -----------------------------------------------------------


def circle_lift(B: FiniteBlaschkeProduct, theta):
    """Continuous branch of ``arg B(e^{i theta})``.

    Each factor contributes ``theta + 2 arg(1 - z_k e^{-i theta})`` and the
    second term stays in (-pi, pi) because ``|z_k| < 1``. The lift is
    strictly increasing with total increase ``2 pi n`` over one turn.
    """
    t = np.asarray(theta, dtype=float)
    a = B.zeros_array.reshape((-1,) + (1,) * t.ndim)
    out = np.angle(B.lam) + B.degree * t + 2.0 * np.sum(np.angle(1.0 - a * np.exp(-1j * t)), axis=0)
    return out if out.ndim else float(out)


def lift_preimages(B: FiniteBlaschkeProduct, w: complex, branches=None) -> np.ndarray:
    """Angles in [0, 2 pi) of the circle preimages of ``w`` via the lift.

    Branch ``m`` solves ``lift(theta) = psi + 2 pi m`` where ``psi`` is the
    first lift of ``arg w`` at or above ``lift(0)``. All ``n`` branches are
    returned by default, in increasing angle. This route shares nothing
    with the polynomial solver and is used as an independent check of it.
    """
    if abs(abs(w) - 1.0) > CIRCLE_TOL:
        raise DomainError("lift_preimages needs a unimodular target")
    n = B.degree
    m = np.arange(n) if branches is None else np.atleast_1d(np.asarray(branches))
    phi0 = circle_lift(B, 0.0)
    psi = math.atan2(w.imag, w.real) if isinstance(w, complex) else float(np.angle(w))
    base = psi + 2.0 * np.pi * math.ceil((phi0 - psi) / (2.0 * np.pi))
    target = base + 2.0 * np.pi * m
    lo = np.zeros(target.shape)
    hi = np.full(target.shape, 2.0 * np.pi)
    theta = (target - phi0) / n
    for _ in range(100):
        f = circle_lift(B, theta) - target
        hi = np.where(f > 0, theta, hi)
        lo = np.where(f <= 0, theta, lo)
        step = f / boundary_derivative_modulus(B, np.exp(1j * theta))
        cand = theta - step
        outside = (cand <= lo) | (cand >= hi)
        theta = np.where(outside, 0.5 * (lo + hi), cand)
        if np.all(np.abs(step) < 4.0 * EPS * (1.0 + np.abs(theta))) and not outside.any():
            break
    return np.mod(theta, 2.0 * np.pi)


# --- fixed points ----------------------------------------------------------


@dataclass(frozen=True)
class FixedPoints:
    """Finite fixed points of ``B`` with multipliers ``B'(p)``.

    ``poly_degree`` is the exact degree of ``P(z) - z Q(z)``; when it is
    below ``n + 1`` the point at infinity is fixed too (``at_infinity``).
    """

    points: np.ndarray
    multipliers: np.ndarray
    poly_degree: int
    at_infinity: bool

    def __iter__(self) -> Iterator:
        return iter(zip(self.points.tolist(), self.multipliers.tolist()))

    def __len__(self):
        return len(self.points)


def fixed_point_polynomial(B: FiniteBlaschkeProduct) -> np.ndarray:
    P, Q = fiber_polynomials(B)
    F = np.zeros(B.degree + 2, dtype=complex)
    F[: len(P)] += P
    F[1 : len(Q) + 1] -= Q
    return F


def fixed_points(B: FiniteBlaschkeProduct) -> FixedPoints:
    """Roots of ``lam prod(z - z_k) - z prod(1 - conj(z_k) z)`` with multipliers."""
    F = fixed_point_polynomial(B)
    if np.max(np.abs(F)) <= TRIM_TOL * 4.0:
        raise DomainError("the identity map has no isolated fixed points")
    n = B.degree
    if B.is_monomial:
        # lam z^n - z: the leading terms cancel exactly, so solve in closed form.
        if n == 1:
            pts = np.zeros(1, dtype=complex)
        else:
            k = np.arange(n - 1)
            ang = (-np.angle(B.lam) + 2.0 * np.pi * k) / (n - 1)
            pts = np.concatenate([[0.0], np.exp(1j * ang)])
        deg = n
    else:
        c = _trim(F)
        deg = len(c) - 1
        pts = poly_roots(c)
    mult = np.atleast_1d(derivative(B, pts))
    return FixedPoints(np.asarray(pts, dtype=complex), mult, deg, deg < n + 1)
