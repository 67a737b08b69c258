"""Quantal response equilibria of entropy-regularized matrix games, and
cost-matrix design that makes a desired joint strategy the unique
equilibrium."""

from .bilevel import BilevelConfig, implicit_gradient, run_projected_gradient
from .errors import (
    DecompositionFailure,
    DimensionMismatch,
    EigendecompositionFailure,
    IndexOutOfRange,
    InfeasibleDetected,
    InnerSolveFailure,
    InvalidGeometry,
    InvalidInput,
    NonFiniteInput,
    NonPositiveLambda,
    NonPositiveStrategy,
    QreGamesError,
    ZeroAreaTotal,
)
from .game import (
    AssumptionReport,
    Game,
    PlayerDims,
    PureTarget,
    check_assumption,
    check_strategy,
    game_from_dict,
    game_to_dict,
    load_game,
    pure_to_strategy,
    save_game,
    uniform_strategy,
    validate_game,
)
from .min_norm import (
    MarginConstraint,
    MinNormConfig,
    build_margin_constraints,
    max_margin_violation,
    solve_min_norm_design,
)
from .objectives import (
    PerformanceObjective,
    kl_objective,
    kl_to_pure,
    potential_delay_objective,
    smooth_target,
)
from .projections import in_feasible_set, project_cone_sum, project_feasible
from .results import DesignResult
from .solver import (
    SolveOutcome,
    SolverConfig,
    logit_response,
    response_jacobian,
    simulate_gumbel_choice,
    solve_equilibrium,
    stationarity_residual,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "BilevelConfig",
    "DecompositionFailure",
    "DesignResult",
    "DimensionMismatch",
    "EigendecompositionFailure",
    "Game",
    "IndexOutOfRange",
    "InfeasibleDetected",
    "InnerSolveFailure",
    "InvalidGeometry",
    "InvalidInput",
    "MarginConstraint",
    "MinNormConfig",
    "NonFiniteInput",
    "NonPositiveLambda",
    "NonPositiveStrategy",
    "PerformanceObjective",
    "PlayerDims",
    "PureTarget",
    "QreGamesError",
    "SolveOutcome",
    "SolverConfig",
    "ZeroAreaTotal",
    "build_margin_constraints",
    "check_assumption",
    "check_strategy",
    "game_from_dict",
    "game_to_dict",
    "implicit_gradient",
    "in_feasible_set",
    "kl_objective",
    "kl_to_pure",
    "load_game",
    "logit_response",
    "max_margin_violation",
    "potential_delay_objective",
    "project_cone_sum",
    "project_feasible",
    "pure_to_strategy",
    "response_jacobian",
    "run_projected_gradient",
    "save_game",
    "simulate_gumbel_choice",
    "smooth_target",
    "solve_equilibrium",
    "solve_min_norm_design",
    "stationarity_residual",
    "uniform_strategy",
    "validate_game",
]
