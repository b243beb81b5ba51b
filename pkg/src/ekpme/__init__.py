"""Self-similar wetting fronts of the time-fractional porous medium equation.

The boundary-value problem u_t^alpha = (D(u) u_x)_x on the half line with
u(0, t) = M reduces, through eta = x t^{-alpha/2}, to an integro-differential
equation driven by an Erdelyi-Kober integral. This package discretizes that
operator with product quadratures, marches the profile backward from the
wetting front, and shoots on the front position so that U(0) = M.
"""

from .diffusivity import (
    AdmissibilityResult,
    CustomDiffusivity,
    DiffusivityModel,
    ExponentialDiffusivity,
    PowerLawDiffusivity,
    RegularizedDiffusivity,
    check_admissible,
    parse_model,
    regularize,
)
from .ek import (
    EKParams,
    EKWeightRow,
    Grid,
    Rule,
    analytic_test_pair,
    apply_ek,
    interval_masses,
    optimal_truncation,
    rectangle_weights,
    trapezoid_weights,
)
from .analysis import (
    ErrorCurve,
    OrderEstimate,
    aitken_order,
    ek_error_curve,
    front_error_table,
    front_orders,
    rectangle_error_bound,
    richardson_reference,
    time_ratio,
)
from .errors import ConvergenceError, ModelSpecError, ShootingError
from .solver import (
    KernelWeightRow,
    Profile,
    ShootingOutcome,
    SolverConfig,
    apriori_bound,
    front_position,
    kernel_trap_moment,
    kernel_weights_rect,
    kernel_weights_trap,
    reconstruct_pde_solution,
    scheme_rhs,
    shoot_front,
    step_profile,
    terminal_value,
)
from .special import SpecialFnConfig, complete_beta, gamma, incomplete_beta

__version__ = "0.1.0"
