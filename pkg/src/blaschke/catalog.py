"""Named Blaschke products used as worked examples and test fixtures.

``R1``..``R4`` are the degree-2 maps

    R1(z) = (2 z^2 - 1) / (2 - z^2)      zeros +-1/sqrt(2)
    R2(z) = (2 z^2 + 1) / (2 + z^2)      zeros +-i/sqrt(2)
    R3(z) = (3 z^2 + 1) / (3 + z^2)      zeros +-i/sqrt(3)
    R4(z) = ((3+i) z^2 + (1-i)) / ((3-i) + (1+i) z^2)

written in Blaschke form, and ``P(n)`` is ``z^n``.
"""
from __future__ import annotations

import cmath
import math

from .core import FiniteBlaschkeProduct, make_blaschke, monomial


def R1() -> FiniteBlaschkeProduct:
    a = 1.0 / math.sqrt(2.0)
    return make_blaschke(1.0, [a, -a])


def R2() -> FiniteBlaschkeProduct:
    a = 1j / math.sqrt(2.0)
    return make_blaschke(1.0, [a, -a])


def R3() -> FiniteBlaschkeProduct:
    a = 1j / math.sqrt(3.0)
    return make_blaschke(1.0, [a, -a])


def R4() -> FiniteBlaschkeProduct:
    a = cmath.sqrt(-0.2 + 0.4j)
    return make_blaschke((3 + 1j) / (3 - 1j), [a, -a])


def P(n: int) -> FiniteBlaschkeProduct:
    return monomial(n)


def rotation(angle: float) -> FiniteBlaschkeProduct:
    """``exp(i angle) z``."""
    return make_blaschke(cmath.exp(1j * angle), [0.0])


def rotation_of_order(q: int) -> FiniteBlaschkeProduct:
    return rotation(2.0 * math.pi / q)


def hyperbolic_example() -> FiniteBlaschkeProduct:
    """``(z + 1/2) / (1 + z/2)``, fixing 1 (attracting) and -1."""
    return make_blaschke(1.0, [-0.5])


def parabolic_example() -> FiniteBlaschkeProduct:
    """``exp(i pi/3) (z - 1/2) / (1 - z/2)``, a degree-1 map with one double boundary fixed point."""
    return make_blaschke(cmath.exp(1j * math.pi / 3.0), [0.5])
