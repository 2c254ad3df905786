"""Exception and warning types shared across the package."""


class BlaschkeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BlaschkeError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(BlaschkeError):
    """An iterative solver did not reach its target accuracy.

    ``residual`` holds the worst residual observed when giving up.
    """

    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


class EllipticMoebiusError(DomainError):
    """Raised for elliptic Moebius maps (or the identity), which have no
    Denjoy-Wolff point. Use :func:`blaschke.core.moebius_classify` instead."""


class AmbiguousClassificationError(BlaschkeError):
    """A dynamical quantity fell inside a tolerance band between two classes.

    ``candidates`` names the competing classes and ``margins`` maps the
    quantity that was tested to its measured distance from the threshold.
    """

    def __init__(self, msg, candidates=(), margins=None):
        super().__init__(msg)
        self.candidates = tuple(candidates)
        self.margins = dict(margins or {})


class NearBoundaryWarning(UserWarning):
    """A zero sits close to the unit circle; Fourier decay downstream is slow."""


class DynamicsWarning(UserWarning):
    """A classification relied on a degenerate higher-order term."""
