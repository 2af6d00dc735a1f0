"""nablakit: weighted-sum/integral identities, positivity certification,
and Cauchy-mean diagnostics for higher-order convex and completely
monotonic functions."""

from .errors import (
    CapabilityError,
    ContractViolation,
    DomainError,
    EvaluationError,
    InputError,
    NablaKitError,
    NotApplicableError,
    NumericalError,
)
from .numerics import (
    DEFAULT_SCHEME,
    DEFAULT_SCHEME_2D,
    DEFAULT_TOLERANCE,
    PsdReport,
    QuadratureScheme,
    TolerancePolicy,
    chebyshev_probes,
    default_fd_step,
    factorial_power,
    falling_factorial,
    integrate_1d,
    integrate_2d,
    numeric_partial,
    psd_check,
    stable_sum,
)
from .grids import Grid1D, Grid2D, as_grid1d, as_grid2d
from .functions import (
    FunctionSpec,
    MonotonicityClaim,
    from_callable,
    from_samples,
    from_samples_2d,
    polynomial_spec,
    polynomial_spec_2d,
    tensor_product,
)
from .differences import (
    ClassifyReport,
    DividedDiffTable,
    classify_sampled,
    divided_difference,
    divided_difference_2d,
    divided_difference_explicit,
    finite_difference_2d,
    nabla_diff,
    nabla_diff_2d,
    sequence_nabla,
)
from .families import (
    CmReport,
    FamilyCatalog,
    family_catalog,
    family_catalog_1d,
    family_phi_q_2d,
    family_phi_v,
    family_psi_q,
    family_psi_v,
    family_zeta_q,
    verify_cm_order,
)
from .identities import (
    IdentityReport,
    WeightSpec,
    corner_double_integral_identity,
    double_integral_identity,
    double_sum_identity,
    func_identity,
    integral_identity_1d,
    separable_double_sum_identity,
    seq_identity,
)
from .positivity import (
    Certificate,
    ConditionResult,
    FunctionalSpec,
    StressReport,
    certify_double_integral,
    certify_double_sum,
    certify_integral_1d,
    evaluate_functional,
    moment_1d,
    positivity_stress,
    require_certified,
    rodrigues_functional,
    rodrigues_truncated_moment,
    rodrigues_weight,
    truncated_moment_1d,
    truncated_moment_2d,
)
from .means import (
    BracketReport,
    GramSpec,
    MeanParams,
    cauchy_ratio,
    expconv_sequence_test,
    g0,
    gram_test,
    lambda_psi,
    lyapunov_check,
    m_st_mean,
    mvt_localize,
    power_mean,
)

__version__ = "0.1.0"
