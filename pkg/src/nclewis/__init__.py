"""Lewis bases, change of density and operator space certificates for subspaces of noncommutative L_p."""
from .algebra import (
    DEFAULT_EPS_REL,
    Op,
    Subspace,
    TracialAlgebra,
    column_square_function,
    inner,
    polar,
    power_on_support,
    schatten_norm,
    singular_values,
    support,
    trace,
)
from .exceptions import BasisCollapseError, ConvergenceError, DomainError, OracleCapError, ShapeError
from .holder import HolderReport, equality_pair, holder_check
from .lewis import ConditionReport, LewisBasisResult, detmax_oracle, lewis_basis, verify_conditions
from .opspace import (
    ColumnSpace,
    DecompositionWitness,
    IntersectionSpace,
    LpSpace,
    RowSpace,
    SumSpace,
    cb_norm_lower_estimate,
    cb_norm_profile,
    column_norm,
    intersection_norm,
    opposite_transpose_check,
    row_norm,
    sum_norm,
    tensor_cauchy_gap,
)

__version__ = "0.1.0"
from .factorization import (
    Certificate,
    CertificateEntry,
    LinearMapMatrix,
    MeasureOptions,
    build_projection,
    doubled_subspace,
    factorize_quotient,
    factorize_subspace,
    rc_distance_certificate,
    row_subspace,
    sharpness_probe,
)
from .estimators import LewisFactorization, check_complex_array
