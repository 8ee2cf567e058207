"""Numerical laboratory for the Gaussian logarithmic Sobolev inequality.

Entropy, Fisher information and deficit of test densities against the
standard Gaussian measure; exact Ornstein-Uhlenbeck evolution by Gaussian
averaging; log-concavity certification; explicit stability bounds with
their improved constants; and constrained searches over the families.
"""

from .errors import (
    CapacityError,
    ConstraintError,
    DomainError,
    FlowError,
    IntegrationError,
    LabError,
    NormalizationError,
    PositivityError,
)
from .measure import GaussianMeasureSpec, QuadratureGrid, build_grid, integrate
from .functions import (
    Affine,
    Bump,
    GaussianProfile,
    HermiteExpansion,
    TestFunction,
    Tilt,
    TwoBumps,
    build_function,
    center_mass,
    first_moment,
    l2_norm,
    normalize,
    second_moment_gap,
)
from .functionals import (
    FunctionalReport,
    IdentityResult,
    PressureData,
    bochner_identity,
    fisher_flux_identity,
    pinsker_gap,
    pressure_integrals,
    report,
)
from .ou_flow import (
    EvolvedDensity,
    FlowState,
    entropy_production_check,
    evolve,
    fisher_dissipation_check,
    flow_csv_rows,
    flow_curve,
    mehler_density,
    q_ode_check,
)
from .logconcavity import (
    LogConcavityCertificate,
    certificate_at_tstar,
    certify,
    certify_along_flow,
)
from .stability import (
    C_STAR,
    GAUSSIAN_CHEEGER,
    HALVED_CDC,
    POINCARE_LOGCONCAVE,
    PipelineResult,
    PoincareEstimate,
    StabilityBound,
    TailWeight,
    cheeger_sandwich,
    compact_improvement_pipeline,
    constants_table,
    excess_moment_decay_check,
    improved_constant_compact,
    kappa_weight,
    lambda1_tail_lower,
    phi,
    phi_inv,
    poincare_chain,
    psi,
    q0_lower_bound,
    t_star_compact,
    t_star_tail,
    tail_weight,
    tau_of_t,
    verify_bounds,
    verify_compact_support,
    verify_entropy_squared,
    verify_fisher_gap,
    verify_gaussian_tail,
    verify_kappa_weighted,
    verify_log_concave,
)
from .search import (
    ExpansionFit,
    SearchProblem,
    SearchResult,
    affine_manifold_distance_sq,
    epsilon_expansion,
    run_search,
)
from . import corpus

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "Bump",
    "C_STAR",
    "CapacityError",
    "ConstraintError",
    "DomainError",
    "EvolvedDensity",
    "ExpansionFit",
    "FlowError",
    "FlowState",
    "FunctionalReport",
    "GAUSSIAN_CHEEGER",
    "GaussianMeasureSpec",
    "GaussianProfile",
    "HALVED_CDC",
    "HermiteExpansion",
    "IdentityResult",
    "IntegrationError",
    "LabError",
    "LogConcavityCertificate",
    "NormalizationError",
    "POINCARE_LOGCONCAVE",
    "PipelineResult",
    "PoincareEstimate",
    "PositivityError",
    "PressureData",
    "QuadratureGrid",
    "SearchProblem",
    "SearchResult",
    "StabilityBound",
    "TailWeight",
    "TestFunction",
    "Tilt",
    "TwoBumps",
    "affine_manifold_distance_sq",
    "bochner_identity",
    "build_function",
    "build_grid",
    "center_mass",
    "certificate_at_tstar",
    "certify",
    "certify_along_flow",
    "cheeger_sandwich",
    "compact_improvement_pipeline",
    "constants_table",
    "corpus",
    "entropy_production_check",
    "epsilon_expansion",
    "evolve",
    "excess_moment_decay_check",
    "first_moment",
    "fisher_dissipation_check",
    "fisher_flux_identity",
    "flow_csv_rows",
    "flow_curve",
    "improved_constant_compact",
    "integrate",
    "kappa_weight",
    "l2_norm",
    "lambda1_tail_lower",
    "mehler_density",
    "normalize",
    "phi",
    "phi_inv",
    "pinsker_gap",
    "poincare_chain",
    "pressure_integrals",
    "psi",
    "q0_lower_bound",
    "q_ode_check",
    "report",
    "run_search",
    "second_moment_gap",
    "t_star_compact",
    "t_star_tail",
    "tail_weight",
    "tau_of_t",
    "verify_bounds",
    "verify_compact_support",
    "verify_entropy_squared",
    "verify_fisher_gap",
    "verify_gaussian_tail",
    "verify_kappa_weighted",
    "verify_log_concave",
]
