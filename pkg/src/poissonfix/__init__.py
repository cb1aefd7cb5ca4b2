"""Exact-arithmetic workbench for Poisson structures on coordinate charts.

The package verifies Poisson brackets symbolically over the rationals,
certifies linear symmetry actions, computes the induced structure on
fixed-point sets two independent ways, and reproduces the torus-quotient
bracket on the standard simplex together with its face stratification.
"""

__version__ = "0.1.0"

from .expr import (
    ChartMismatchError,
    ExprError,
    ParseError,
    PoleError,
    Polynomial,
    RationalFunction,
    UnknownVariableError,
    Variable,
    ZeroDenominatorError,
    differentiate,
    divides,
    eval_at,
    make_variables,
    parse_expr,
    poly_gcd,
    substitute,
)
from .poisson import (
    Chart,
    CovectorExpr,
    JacobiError,
    NonSkewError,
    PoissonStructure,
    VectorFieldExpr,
    bracket,
    hamiltonian_vf,
    jacobi_defect,
    jacobi_triples,
    pushforward_linear,
    rank_at,
    sharp,
)
from .actions import (
    ActionCheckReport,
    ClosureError,
    FiniteActionSpec,
    InvariantMetric,
    LinearSubmanifold,
    NonPoissonActionError,
    TorusActionSpec,
    average_function,
    average_metric,
    enumerate_group,
    fixed_subspace,
    is_poisson_action,
    orthogonal_complement,
)
from .reduction import (
    ConstructionMismatchError,
    ReduceOptions,
    ReductionReport,
    SplitContext,
    SplitInvalidError,
    check_eq1,
    check_sharp_E0,
    extension_independence_test,
    induced_bracket_via_extensions,
    induced_structure,
    make_split_context,
    reduce_fixed_set,
    split_bivector,
)
from .simplex import (
    DerivationMismatchError,
    FaceDescriptor,
    SkewParamMatrix,
    check_face_stratification,
    cpn_bracket,
    derive_simplex_bracket,
    enumerate_faces,
    moment_components,
    random_skew,
    simplex_bracket,
    standard_torus_weights,
    torus_pairs,
)
