"""Boundary dynamics of finite Blaschke products and the algebra report.

The Denjoy-Wolff point selects the dynamical class, the class decides
whether the Julia set is the whole circle or a Cantor set, and that in
turn decides simplicity of the associated Cuntz-Pimsner algebra. K-groups
are read from a fixed table keyed on the degree and the Moebius type.
"""
from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    FiniteBlaschkeProduct,
    MoebiusKind,
    derivatives,
    evaluate,
    moebius_classify,
)
from .errors import (
    AmbiguousClassificationError,
    ConvergenceError,
    DomainError,
    DynamicsWarning,
    EllipticMoebiusError,
)
from .roots import fixed_points

PARABOLIC_TOL = 1e-8
BOUNDARY_TOL = 1e-8
# Margins between tol and AMBIGUITY_FACTOR * tol belong to neither class.
AMBIGUITY_FACTOR = 100.0
MULTIPLIER_SLACK = 1e-9
DEDUP_RADIUS = 1e-6
SAMPLER_START_ANGLE = 0.7
WALK_RESIDUAL_TOL = 1e-9
MIN_SAMPLE_COUNT = 100
LIFT_STEP_TOL = 1e-13
MIN_BURN_IN = 50


class Location(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"


class DynamicsClass(enum.Enum):
    INTERIOR_FIXED = "InteriorFixed"
    BOUNDARY_ATTRACTING = "BoundaryAttracting"
    PARABOLIC_TWO_PETALS = "ParabolicTwoPetals"
    PARABOLIC_ONE_PETAL = "ParabolicOnePetal"


class JuliaType(enum.Enum):
    FULL_CIRCLE = "FullCircle"
    CANTOR = "Cantor"


class Structure(enum.Enum):
    MATRIX_ALGEBRA_OVER_CIRCLE = "MatrixAlgebraOverCircle"
    CROSSED_PRODUCT_BY_Z = "CrossedProductByZ"
    CUNTZ_PIMSNER = "CuntzPimsner"


@dataclass(frozen=True)
class FixedPointReport:
    """The Denjoy-Wolff point with its multiplier and derivative data.

    ``second_derivative`` and ``third_derivative`` are filled only near the
    parabolic case. ``margins`` holds ``1 - |w0|`` and ``1 - |multiplier|``.
    """

    point: complex
    multiplier: complex
    location: Location
    second_derivative: Optional[complex] = None
    third_derivative: Optional[complex] = None
    margins: dict = field(default_factory=dict, compare=False)
    residual: float = 0.0


@dataclass(frozen=True)
class DynamicsReport:
    kind: DynamicsClass
    fixed_point: FixedPointReport
    margins: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class KGroup:
    """A finitely generated abelian group ``Z^rank (+) Z/torsion``."""

    rank: int
    torsion: Optional[int] = None

    def __str__(self):
        free = "Z" if self.rank == 1 else f"Z^{self.rank}"
        if self.rank == 0:
            free = "0"
        if self.torsion is None or self.torsion == 1:
            return free
        return f"{free}+Z/{self.torsion}Z"

    def describe(self) -> str:
        """Long form that keeps a trivial torsion summand visible."""
        if self.torsion is None:
            return str(self)
        free = "Z" if self.rank == 1 else f"Z^{self.rank}"
        return f"{free} (+) Z/{self.torsion}Z"


@dataclass(frozen=True)
class AlgebraReport:
    degree: int
    structure: Structure
    structure_order: Optional[int]
    k0: KGroup
    k1: KGroup
    identity_class: Optional[tuple]
    julia: Optional[JuliaType]
    simple: Optional[bool]
    quotient_note: Optional[str] = None
    dynamics: Optional[DynamicsReport] = None

    @property
    def structure_string(self) -> str:
        if self.structure is Structure.MATRIX_ALGEBRA_OVER_CIRCLE:
            return f"MatrixAlgebraOverCircle({self.structure_order})"
        return self.structure.value


@dataclass(frozen=True)
class OrbitSample:
    angles: np.ndarray
    seed: int
    burn_in: int
    count: int
    max_step_residual: float = 0.0


# --- Denjoy-Wolff point ------------------------------------------------------


def _band(margin: float, tol: float):
    """True below ``tol``, False above ``AMBIGUITY_FACTOR * tol``, None between."""
    if margin <= tol:
        return True
    if margin > AMBIGUITY_FACTOR * tol:
        return False
    return None


def denjoy_wolff(
    B: FiniteBlaschkeProduct,
    boundary_tol: float = BOUNDARY_TOL,
    parabolic_tol: float = PARABOLIC_TOL,
) -> FixedPointReport:
    """The unique fixed point in the closed disk with ``|B'(w0)| <= 1``.

    Elliptic Moebius maps and the identity have no such point and raise
    :class:`EllipticMoebiusError`.
    """
    if B.degree == 1:
        mk = moebius_classify(B)
        if mk.is_elliptic:
            raise EllipticMoebiusError(
                f"{mk} has no Denjoy-Wolff point; use moebius_classify instead"
            )
    fp = fixed_points(B)
    cand, borderline = [], []
    for p, m in fp:
        if abs(p) <= 1.0 + boundary_tol and abs(m) <= 1.0 + MULTIPLIER_SLACK:
            if all(abs(p - q) > DEDUP_RADIUS for q, _ in cand):
                cand.append((p, m))
        elif (abs(p) <= 1.0 + AMBIGUITY_FACTOR * boundary_tol
              and abs(m) <= 1.0 + AMBIGUITY_FACTOR * MULTIPLIER_SLACK):
            borderline.append((p, m))
    # points just outside the acceptance test are only discarded when they
    # coincide with an accepted one
    kept = list(cand)
    for p, m in borderline:
        if all(abs(p - q) > DEDUP_RADIUS for q, _ in kept):
            kept.append((p, m))
    if not kept:
        raise ConvergenceError("no fixed point in the closed disk has |multiplier| <= 1")
    if len(kept) > 1 or not cand:
        raise AmbiguousClassificationError(
            "the Denjoy-Wolff point is not uniquely determined at these tolerances",
            candidates=[p for p, _ in kept],
            margins={f"|mult|-1 at {p:.12g}": abs(m) - 1.0 for p, m in kept},
        )
    w0, mult = cand[0]
    loc_margin = 1.0 - abs(w0)
    on_circle = _band(abs(loc_margin), boundary_tol)
    margins = {"location": loc_margin, "multiplier": 1.0 - abs(mult)}
    if on_circle is None:
        raise AmbiguousClassificationError(
            f"|w0| = {abs(w0):.15g} lies between the interior and boundary bands",
            candidates=(Location.INTERIOR, Location.BOUNDARY),
            margins=margins,
        )
    if on_circle:
        w0 = w0 / abs(w0)
    d = derivatives(B, w0, 3)
    near_parabolic = abs(d[1] - 1.0) <= AMBIGUITY_FACTOR * parabolic_tol
    return FixedPointReport(
        point=complex(w0),
        multiplier=complex(d[1]),
        location=Location.BOUNDARY if on_circle else Location.INTERIOR,
        second_derivative=complex(d[2]) if near_parabolic else None,
        third_derivative=complex(d[3]) if near_parabolic else None,
        margins=margins,
        residual=abs(d[0] - w0),
    )


def dynamics_report(
    B: FiniteBlaschkeProduct,
    boundary_tol: float = BOUNDARY_TOL,
    parabolic_tol: float = PARABOLIC_TOL,
) -> DynamicsReport:
    """Dynamical class of a degree >= 2 product with the margins behind it."""
    if B.degree < 2:
        raise DomainError("dynamical classification needs degree >= 2")
    fp = denjoy_wolff(B, boundary_tol, parabolic_tol)
    margins = dict(fp.margins)
    if fp.location is Location.INTERIOR:
        return DynamicsReport(DynamicsClass.INTERIOR_FIXED, fp, margins)

    mult_margin = 1.0 - fp.multiplier.real
    margins["multiplier"] = mult_margin
    parabolic = _band(mult_margin, parabolic_tol)
    if parabolic is None:
        raise AmbiguousClassificationError(
            f"multiplier {fp.multiplier:.15g} is within the parabolic ambiguity band",
            candidates=(DynamicsClass.BOUNDARY_ATTRACTING, DynamicsClass.PARABOLIC_ONE_PETAL),
            margins=margins,
        )
    if not parabolic:
        return DynamicsReport(DynamicsClass.BOUNDARY_ATTRACTING, fp, margins)

    second = abs(fp.second_derivative)
    margins["second_derivative"] = second
    two_petals = _band(second, parabolic_tol)
    if two_petals is None:
        raise AmbiguousClassificationError(
            f"|R''(w0)| = {second:.3e} is within the petal ambiguity band",
            candidates=(DynamicsClass.PARABOLIC_TWO_PETALS, DynamicsClass.PARABOLIC_ONE_PETAL),
            margins=margins,
        )
    if two_petals:
        third = abs(fp.third_derivative)
        margins["third_derivative"] = third
        if third < parabolic_tol:
            warnings.warn(
                "R''(w0) and R'''(w0) both vanish; the petal count rests on higher terms",
                DynamicsWarning,
                stacklevel=2,
            )
        return DynamicsReport(DynamicsClass.PARABOLIC_TWO_PETALS, fp, margins)
    return DynamicsReport(DynamicsClass.PARABOLIC_ONE_PETAL, fp, margins)


def classify_dynamics(
    B: FiniteBlaschkeProduct,
    boundary_tol: float = BOUNDARY_TOL,
    parabolic_tol: float = PARABOLIC_TOL,
) -> DynamicsClass:
    return dynamics_report(B, boundary_tol, parabolic_tol).kind


_FULL_CIRCLE = {DynamicsClass.INTERIOR_FIXED, DynamicsClass.PARABOLIC_TWO_PETALS}


def julia_from_class(kind: DynamicsClass) -> JuliaType:
    return JuliaType.FULL_CIRCLE if kind in _FULL_CIRCLE else JuliaType.CANTOR


def julia_type(
    B: FiniteBlaschkeProduct,
    boundary_tol: float = BOUNDARY_TOL,
    parabolic_tol: float = PARABOLIC_TOL,
) -> JuliaType:
    """Whole circle or Cantor set, decided by the dynamical class."""
    if B.degree < 2:
        raise DomainError("julia requires degree >= 2")
    return julia_from_class(classify_dynamics(B, boundary_tol, parabolic_tol))


# --- algebra report ----------------------------------------------------------


def algebra_report(
    B: FiniteBlaschkeProduct,
    q_max: int = 10_000,
    boundary_tol: float = BOUNDARY_TOL,
    parabolic_tol: float = PARABOLIC_TOL,
) -> AlgebraReport:
    """Structure, K-groups and simplicity of the algebra attached to ``B``."""
    n = B.degree
    if n == 1:
        mk = moebius_classify(B, q_max=q_max)
        if mk.kind in (MoebiusKind.IDENTITY, MoebiusKind.ELLIPTIC_FINITE_ORDER):
            return AlgebraReport(
                1, Structure.MATRIX_ALGEBRA_OVER_CIRCLE, mk.order,
                KGroup(1), KGroup(1), None, None, None,
            )
        return AlgebraReport(
            1, Structure.CROSSED_PRODUCT_BY_Z, None, KGroup(2), KGroup(2), None, None, None
        )

    dyn = dynamics_report(B, boundary_tol, parabolic_tol)
    julia = julia_from_class(dyn.kind)
    note = None
    if dyn.kind is DynamicsClass.BOUNDARY_ATTRACTING:
        note = f"quotient by J_R-ideal ≅ O_{n}"
    return AlgebraReport(
        degree=n,
        structure=Structure.CUNTZ_PIMSNER,
        structure_order=None,
        k0=KGroup(1, n - 1),
        k1=KGroup(1),
        identity_class=(0, 1),
        julia=julia,
        simple=julia is JuliaType.FULL_CIRCLE,
        quotient_note=note,
        dynamics=dyn,
    )


# --- backward orbit sampler --------------------------------------------------


def _lift(lam_arg, zeros, n, theta):
    e = cmath.exp(-1j * theta)
    return lam_arg + n * theta + 2.0 * sum(cmath.phase(1.0 - a * e) for a in zeros)


def _lift_slope(zeros, theta):
    z = cmath.exp(1j * theta)
    return sum((1.0 - abs(a) ** 2) / abs(z - a) ** 2 for a in zeros)


def _branch_angle(lam_arg, zeros, n, phi0, psi, m):
    """Angle in ``[0, 2 pi)`` on lift branch ``m`` over the target angle ``psi``."""
    target = psi + 2.0 * math.pi * (math.ceil((phi0 - psi) / (2.0 * math.pi)) + m)
    lo, hi = 0.0, 2.0 * math.pi
    theta = (target - phi0) / n
    for _ in range(100):
        f = _lift(lam_arg, zeros, n, theta) - target
        if f > 0:
            hi = theta
        else:
            lo = theta
        step = f / _lift_slope(zeros, theta)
        cand = theta - step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        elif abs(step) < LIFT_STEP_TOL:
            return cand % (2.0 * math.pi)
        theta = cand
        if hi - lo < LIFT_STEP_TOL:
            return theta % (2.0 * math.pi)
    raise ConvergenceError("circle lift solve did not converge", residual=abs(f))


def backward_sample(
    B: FiniteBlaschkeProduct, count: int, seed: int, burn_in: int
) -> OrbitSample:
    """Random backward orbit on the circle, started at ``exp(0.7 i)``.

    Each step jumps to one of the ``n`` circle preimages, chosen uniformly
    with a PCG64 generator seeded by ``seed``. The first ``burn_in`` points
    are discarded and the next ``count`` angles are returned sorted.
    """
    if B.degree < 2:
        raise DomainError("julia requires degree >= 2")
    if count < MIN_SAMPLE_COUNT:
        raise DomainError(f"count must be >= {MIN_SAMPLE_COUNT}")
    if burn_in < MIN_BURN_IN:
        raise DomainError(f"burn_in must be >= {MIN_BURN_IN}")
    n = B.degree
    zeros = B.zeros
    lam_arg = cmath.phase(B.lam)
    phi0 = _lift(lam_arg, zeros, n, 0.0)
    rng = np.random.Generator(np.random.PCG64(seed))
    branches = rng.integers(0, n, size=burn_in + count).tolist()

    psi = SAMPLER_START_ANGLE
    out = np.empty(count)
    thetas = np.empty(burn_in + count)
    for t, m in enumerate(branches):
        psi = _branch_angle(lam_arg, zeros, n, phi0, psi, m)
        thetas[t] = psi
    # Check every step of the walk in one vectorized pass.
    z = np.exp(1j * thetas)
    prev = np.concatenate([[np.exp(1j * SAMPLER_START_ANGLE)], z[:-1]])
    res = np.abs(evaluate(B, z) - prev)
    worst = float(res.max())
    if worst > WALK_RESIDUAL_TOL:
        raise ConvergenceError(f"backward step residual {worst:.3e} exceeds tolerance", residual=worst)
    out[:] = np.sort(thetas[burn_in:])
    out.setflags(write=False)
    return OrbitSample(out, seed, burn_in, count, worst)


def max_gap(s) -> float:
    """Largest circular gap between consecutive sorted angles, wrap-around included."""
    a = np.sort(np.mod(np.asarray(getattr(s, "angles", s), dtype=float), 2.0 * np.pi))
    if len(a) < 2:
        raise DomainError("max_gap needs at least two angles")
    gaps = np.diff(a)
    return float(max(gaps.max(), 2.0 * np.pi - a[-1] + a[0]))
