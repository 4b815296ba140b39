"""otlab: exact discrete optimal transport and convergence-rate experiments.

The package solves the discrete transport problem exactly (network
simplex, with permutation brute force as an oracle and verifiable duality
certificates), provides the discrete c-transform calculus on cost
matrices, and runs seeded Monte Carlo experiments measuring how fast the
empirical transport cost approaches its population value in cube, sphere,
and semi-discrete settings.
"""

from .benchmarks import (
    CubeConfig,
    OracleParams,
    PopulationCost,
    SemiDiscreteConfig,
    SphereConfig,
    c_projection,
    c_projection_batch,
    parse_setting,
    population_cost,
    sample_cube,
    sample_semidiscrete_mu,
    sample_semidiscrete_nu,
    sample_sphere,
    semidiscrete_mu_weights,
    semidiscrete_sites,
    setting_string,
    sphere_symmetry_map,
)
from .convergence import (
    ESTIMATORS,
    ONE_SAMPLE_MU,
    ONE_SAMPLE_NU,
    TWO_SAMPLE,
    CombinationError,
    ConvergenceTable,
    RateFit,
    TableRow,
    decomposition_residual,
    dependent_coupling_check,
    empirical_deviation,
    fit_rate,
    run_convergence,
    theory_rate_for,
)
from .costs import (
    CostError,
    CostMatrix,
    CostSpec,
    additive,
    cost_matrix,
    cost_string,
    eval_cost,
    l1,
    pairwise_cost,
    parse_cost,
    pow_coordinatewise,
    pow_euclidean,
    residual_values,
    sql2,
)
from .ctransform import (
    c_transform_xy,
    c_transform_yx,
    canonical_potentials,
    contraction_gap,
    double_transform,
    feasibility_check,
)
from .measures import (
    DiscreteMeasure,
    MeasureError,
    push_forward_projection,
    read_measure,
    residual_cost_functional,
    validate_measure,
)
from .rates import (
    PARAM,
    PARAM_LOG,
    POLY,
    TheoryRate,
    dudley_rademacher_bound,
    theory_rate_family,
    theory_rate_general,
)
from .solver import (
    CertificateReport,
    SolverError,
    TransportPlan,
    TransportSolution,
    brute_force_uniform,
    dual_objective,
    optimal_cost,
    solve_exact,
    verify_certificate,
)

__version__ = "0.1.0"
