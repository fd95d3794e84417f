"""Quasi-geodesics on the Stiefel manifold.

Economy-size quasi-geodesics (a p x p principal log plus compact SVDs),
short quasi-geodesics with a Baker-Campbell-Hausdorff correction block
(a 2p x 2p log), and the verification machinery to check both against
full-size representations, finite differences and a shooting logarithm.
"""

__version__ = "0.1.0"

from .errors import (
    BaseMismatch,
    DimensionError,
    EigenvalueAtMinusOne,
    NoConvergence,
    NotOrthonormal,
    NumericalError,
    OrientationMismatch,
    ParseError,
    StiefelQGError,
    SubspaceAngleTooLarge,
    ValidationError,
    ValueOutOfRange,
)
from .matfunc import (
    arcsin_clamped,
    compact_svd,
    matrix_exp,
    matrix_log_so,
    orthonormal_completion,
    skew_part,
)
from .stiefel import (
    StiefelPoint,
    TangentVector,
    canonical_inner,
    canonical_inner_ambient,
    canonical_norm,
    canonical_norm_ambient,
    gaussian_matrix,
    make_point,
    project_tangent,
    random_point,
    random_tangent,
    read_matrix_file,
    rng_from_seed,
    stiefel_exp,
    write_matrix_file,
)
from .quasigeo import (
    BchFactors,
    EconQuasiGeodesic,
    ShortQuasiGeodesic,
    bch_c1,
    bch_c_iterate,
    bch_factors,
    c_residual,
    econ_qg_connect,
    econ_qg_covaccel_norm,
    econ_qg_eval,
    econ_qg_from_tangent,
    econ_qg_length,
    econ_qg_velocity,
    retraction_rs,
    short_qg_connect,
    short_qg_covaccel_norm,
    short_qg_eval,
    short_qg_length,
    short_qg_velocity,
)
from .oracle import (
    ShootingConfig,
    covariant_accel_numeric,
    full_frame,
    full_geodesic_eval,
    full_qg_eval,
    riemannian_dist,
    stiefel_log_shooting,
    tangent_completion_form,
)
