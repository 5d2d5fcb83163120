"""Coordination equilibria, minimax punishments and payoff geometry for
small repeated games."""

from .game import (
    ArityMismatchError,
    DuplicateLabelError,
    GameFormatError,
    GameSyntaxError,
    MissingPayoffError,
    StageGame,
    UnknownLabelError,
    action_dominates,
    as_fraction,
    builtin_games,
    load_builtin,
    parse_game,
    serialize_game,
    zero_sum_check,
)
from .minimax import MinimaxResult, minimax_point, minimax_value
from .strategies import (
    CoordinationPlan,
    ReactiveStrategy,
    constant_strategy,
    cycle_strategy,
    fig2_coordinator,
    grim_trigger,
    myopic_best_responder,
    outsider_responses,
    strategy_from_spec,
)
from .simulate import (
    SimulationRun,
    fig2_convergence_experiment,
    limit_average_of_path,
    run,
    trace_to_csv,
)
from .equilibrium import (
    DeviationWitness,
    DiscountThreshold,
    SearchBudgetError,
    VerificationReport,
    achievable_points,
    candidate_paths,
    candidate_path_payoffs,
    check_eq4,
    check_eq5,
    discount_threshold,
    discount_thresholds,
    enumerate_type_k,
    plan_outcome,
    random_game,
    stage_ne_stability,
    stage_pure_ne,
    verify_type_k,
)
from .geometry import (
    PayoffGeometry,
    feasible_hull,
    folk_region_member,
    hull_of_points,
    in_hull,
    pareto_frontier,
    pareto_optimal,
    project,
)

__version__ = "0.1.0"
