"""Tilt-stability analysis of Ky-Fan kappa-norm regularized problems.

Closed-form subdifferential tests, second-subderivative formulas, critical
cones, and the kernel-intersection tilt criterion for

    min_X  nu * theta(X) + Psi_kappa(X),

with Psi_kappa the sum of the kappa largest singular values, each route
cross-validated by independent brute-force oracles.
"""

from .config import DEFAULT_TOLS, Tolerances
from .io import SchemaError, canonical_dumps, matrix_from_json, matrix_to_json, unvec, vec
from .oracle import (
    ProbeConfig,
    QuotientConfig,
    SolverConfig,
    SolverError,
    d2_quotient_oracle,
    kyfan_matrix_prox,
    kyfan_vector_prox,
    solve_tilted,
    tilt_probe,
)
from .phik import phi_second_subderiv, phi_subdiff_membership, phi_value
from .secder import (
    CriticalConeCert,
    SecondSubderivValue,
    critical_cone_membership,
    d2_nuclear,
    d2_psi_explicit,
    d2_psi_general,
    d2_spectral,
    d2_zero_set_membership,
)
from .spectral import bmap, bmap_adjoint, build_frame, eigen_grouped, group_singular, svd_ordered
from .subgrad import (
    SubgradCertificate,
    multiplier_membership,
    psi_value,
    subdiff_membership,
)
from .tilt import (
    INCONCLUSIVE,
    STABLE,
    UNSTABLE,
    LeastSquaresTheta,
    ProblemSpec,
    QuadraticTheta,
    StationarityError,
    TiltOptions,
    TiltVerdict,
    UpsilonSpec,
    build_upsilon,
    generic_kernel_test,
    tilt_check,
)

__version__ = "0.1.0"
