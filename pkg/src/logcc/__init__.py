"""logcc: the calculus of log-concave functions on regular grids.

Legendre-Fenchel transforms and biconjugation, sup-convolutions and Lp
combinations, surface-area measures as gradient push-forwards, first
variation and co-area verifiers, and a variational solver for the even
functional Lp Minkowski problem.
"""

from .grid import (
    EmptyDomainError,
    ExtendedGridFunction,
    GradientField,
    Grid,
    LogConcaveFunction,
    OutOfDomainError,
    PreconditionError,
    evaluate,
    gradient_map,
    integrate_exp_neg,
    superlevel_perimeter,
    truncation_tail_bound,
)
from .legendre import LftResult, argmax_consistency_check, biconjugate, lft, lft_1d
from .calculus import (
    alexandrov,
    is_essentially_continuous,
    log_integral_functional,
    lp_combination,
    scale,
    sup_convolution,
    support_function,
)
from .measures import (
    DiscreteMeasure,
    MeasureDistance,
    binned_density,
    integrate_against,
    lp_surface_area_measure,
    measure_distance,
    surface_area_measure,
)
from .variation import (
    CoareaReport,
    PointwiseDerivativeReport,
    SubdifferentialReport,
    VariationReport,
    coarea_check,
    default_schedule,
    first_variation_estimate,
    first_variation_predicted,
    first_variation_report,
    lp_first_variation_predicted,
    pointwise_derivative_check,
    subdifferential_check,
)
from .minkowski import (
    MaResidualReport,
    SolverConfig,
    SolverResult,
    constraint_gradient_check,
    ma_residual,
    ma_residual_field,
    objective,
    solve_lp_minkowski,
)

__version__ = "0.1.0"
