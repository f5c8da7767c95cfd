"""Convex optimization on transport polytopes by single-loop entropic scaling."""

from .core import (
    ConfigurationError,
    DegenerateIterateError,
    OracleError,
    TransportPolytope,
    as_marginal,
    col_normalize,
    constraint_violation,
    entropic_radius,
    independent_coupling,
    kl_divergence,
    negative_entropy,
    row_normalize,
)
from .schedules import StepSchedule, min_horizon_for_epsilon
from .rounding import round_to_polytope
from .solver import (
    GradientOracle,
    RunTrace,
    SolverConfig,
    SolverState,
    initial_state,
    solve,
    solve_online,
    step,
)
from .objectives import (
    Objective,
    entropic_ot_objective,
    estimate_lipschitz_bound,
    finite_difference_gradient,
    inner_product_cost_oracle,
    linear_objective,
    marginal_regularized,
    noisy_oracle,
    planted_strongly_convex,
    procrustes_objective,
    subsampled_oracle,
)
from .tensor import (
    TensorPolytope,
    TensorSolverState,
    constraint_gaps,
    mode_marginal,
    product_tensor,
    tensor_initial_state,
    tensor_radius,
    tensor_solve,
    tensor_step,
)
from .baselines import ExactSolution, exact_ot_small, ot_value_by_vertex_enumeration, sinkhorn

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DegenerateIterateError",
    "ExactSolution",
    "GradientOracle",
    "Objective",
    "OracleError",
    "RunTrace",
    "SolverConfig",
    "SolverState",
    "StepSchedule",
    "TensorPolytope",
    "TensorSolverState",
    "TransportPolytope",
    "as_marginal",
    "col_normalize",
    "constraint_gaps",
    "constraint_violation",
    "entropic_ot_objective",
    "entropic_radius",
    "estimate_lipschitz_bound",
    "exact_ot_small",
    "finite_difference_gradient",
    "independent_coupling",
    "initial_state",
    "inner_product_cost_oracle",
    "kl_divergence",
    "linear_objective",
    "marginal_regularized",
    "min_horizon_for_epsilon",
    "mode_marginal",
    "negative_entropy",
    "noisy_oracle",
    "ot_value_by_vertex_enumeration",
    "planted_strongly_convex",
    "procrustes_objective",
    "product_tensor",
    "round_to_polytope",
    "row_normalize",
    "sinkhorn",
    "solve",
    "solve_online",
    "step",
    "subsampled_oracle",
    "tensor_initial_state",
    "tensor_radius",
    "tensor_solve",
    "tensor_step",
]
