"""Finite Blaschke products: root finding, transfer operators, Hardy-space
finite sections and boundary dynamics."""
from .core import (
    FiniteBlaschkeProduct,
    MoebiusKind,
    MoebiusReport,
    boundary_derivative_modulus,
    compose,
    derivative,
    derivatives,
    evaluate,
    iterate,
    make_blaschke,
    moebius_classify,
    monomial,
)
from .dynamics import (
    AlgebraReport,
    DynamicsClass,
    FixedPointReport,
    JuliaType,
    KGroup,
    Location,
    OrbitSample,
    Structure,
    algebra_report,
    backward_sample,
    classify_dynamics,
    denjoy_wolff,
    dynamics_report,
    julia_type,
    max_gap,
)
from .errors import (
    AmbiguousClassificationError,
    BlaschkeError,
    ConvergenceError,
    DomainError,
    DynamicsWarning,
    EllipticMoebiusError,
    NearBoundaryWarning,
)
from .hardy import (
    TruncatedOperator,
    block_size,
    composition_matrix,
    covariant_defect,
    cuntz_defect,
    h2_basis_gram_defect,
    spectral_norm,
    toeplitz_matrix,
)
from .roots import (
    FiberReport,
    FixedPoints,
    PolynomialC,
    fixed_points,
    poly_roots,
    preimages,
    preimages_many,
)
from .specfile import BlaschkeSpec, SpecFileError, format_spec, load_spec, parse_spec
from .transfer import (
    SymbolFunction,
    TMBasis,
    aleksandrov,
    aleksandrov_grid,
    poisson_mass_residual,
    tm_basis,
    tm_orthonormality_defect,
    xr_inner,
    xr_norm,
)

__version__ = "0.1.0"
