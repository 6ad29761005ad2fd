"""Finite unit-norm tight frames: frame potential descent, certificates and
unit-norm resolutions of positive semi-definite matrices."""

__version__ = "0.1.0"

from .decomposition import (
    Decomposition,
    Ellipsoid,
    decompose_unit_norm,
    deflate_once,
    equal_norm_orthogonal,
    rho_target,
)
from .frames import (
    FrameCertificate,
    UnitVectorSystem,
    certify,
    frame_operator,
    frame_potential,
    gram_matrix,
    mercedes_benz,
    optimality_gap,
    potential_lower_bound,
)
from .linalg import (
    EigenDecomposition,
    NumericalError,
    eigh_symmetric,
    hs_inner,
    hs_norm,
    outer,
    restrict_quadratic_form,
    sym_matrix,
)
from .minimizer import (
    EigenPartition,
    MinimizeReport,
    MinimizerConfig,
    SaddleEscape,
    eigen_partition,
    fp_gradient,
    generate_frame,
    geodesic_step,
    minimize,
    saddle_escape_direction,
)
