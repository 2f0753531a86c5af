"""Lower bounds for the first basic eigenvalue of singular Riemannian foliations.

The package collects the closed-form bounds, the one-dimensional comparison
model that dominates them, the auxiliary barrier function used by the refined
Zhong-Yang estimate, and a set of foliations with known spectra to test
everything against.
"""

from .bounds import (
    BoundInput,
    BoundResult,
    OptimalS,
    best_bound,
    li_type,
    lichnerowicz,
    model_bound,
    optimal_bound_expansion,
    optimal_s,
    shi_zhang,
    shi_zhang_optimal,
    zhong_yang,
)
from .checks import CheckReport
from .errors import (
    BracketFailure,
    DomainError,
    FoliationBoundsError,
    HierarchyViolation,
    InvalidEndpoint,
    InvalidInput,
    InvalidMultiplicity,
    NonConvergence,
    QuadratureFailure,
    SeriesOverflow,
    SolverError,
    StiffIntegration,
)
from .foliation_zoo import (
    FoliationExample,
    hopf_example,
    isoparametric_example,
    mapping_torus_example,
    rigidity_certificate,
    standard_zoo,
)
from .model_ode import (
    ModelProblem,
    check_central_minimal,
    check_diameter_monotone,
    model_eigenvalue,
    model_solve,
)
from .psi_kernel import (
    Normalization,
    barrier_integral,
    barrier_integral_crosscheck,
    gradient_estimate_check,
    psi,
    psi_ode_residual,
    refined_zhong_yang,
    series_coefficient,
)
from .sl_engine import (
    NEUMANN,
    EndpointKind,
    SLProblem,
    SpectrumResult,
    singular_pole,
    solve_neumann_fd,
    solve_neumann_fd_extrapolated,
    solve_neumann_shooting,
)

__version__ = "0.1.0"
