"""Exact solvers for simple stochastic games.

Games are directed graphs where a max player, a min player, and fair
coin flips move a token toward one of two sinks; the package computes
each vertex's optimal probability of reaching the 1-sink as an exact
rational, along with optimal strategies, decision answers, and
machine-checkable certificates.
"""

from .exceptions import (
    BudgetError,
    CertificateError,
    FormatError,
    GenerationError,
    InfeasibleError,
    InternalCheckError,
    LPError,
    NonConvergenceError,
    PreconditionError,
    SSGError,
    StrategyError,
    UnboundedError,
    ValidationError,
)
from .games import (
    Game,
    Strategy,
    ValueVector,
    VertexKind,
    build_game,
    enumerate_strategies,
    format_rational,
    parse_game,
    parse_rational,
    serialize_game,
    validate_game,
    validate_strategy,
)
from .generate import random_game
from .lp import (
    Constraint,
    LinearProgram,
    SimplexResult,
    build_lp_max_free,
    build_lp_min_free,
    dump_lp,
    simplex_optimize,
    simplex_solve,
    zero_value_set,
)
from .markov import (
    LinearSystem,
    MCEstimate,
    ReducedGame,
    build_linear_system,
    in_value_set,
    is_stopping,
    is_stopping_exhaustive,
    mc_estimate,
    reduce_game,
    sink_reachable_set,
    solve_value_vector,
)
from .solve import (
    Certificate,
    SolveReport,
    apply_operator,
    avg_free_run,
    best_response,
    brute_force_oracle,
    decide_value,
    default_epsilon,
    game_value,
    greedy_strategies,
    hoffman_karp,
    round_to_value_set,
    solve,
    solve_avg_free,
    value_iteration,
    value_separation,
    verify_ovv_certificate,
    verify_value_certificate,
    vi_iterates,
)
from .stopping import (
    BoundCheck,
    StoppingTransform,
    build_stopping_game,
    lift_strategy,
    transform_error_bound,
    verify_transform_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCheck",
    "BudgetError",
    "Certificate",
    "CertificateError",
    "Constraint",
    "FormatError",
    "Game",
    "GenerationError",
    "InfeasibleError",
    "InternalCheckError",
    "LPError",
    "LinearProgram",
    "LinearSystem",
    "MCEstimate",
    "NonConvergenceError",
    "PreconditionError",
    "ReducedGame",
    "SSGError",
    "SimplexResult",
    "SolveReport",
    "StoppingTransform",
    "Strategy",
    "StrategyError",
    "UnboundedError",
    "ValidationError",
    "ValueVector",
    "VertexKind",
    "apply_operator",
    "avg_free_run",
    "best_response",
    "brute_force_oracle",
    "build_game",
    "build_linear_system",
    "build_lp_max_free",
    "build_lp_min_free",
    "build_stopping_game",
    "decide_value",
    "default_epsilon",
    "dump_lp",
    "enumerate_strategies",
    "format_rational",
    "game_value",
    "greedy_strategies",
    "hoffman_karp",
    "in_value_set",
    "is_stopping",
    "is_stopping_exhaustive",
    "lift_strategy",
    "mc_estimate",
    "parse_game",
    "parse_rational",
    "random_game",
    "reduce_game",
    "round_to_value_set",
    "serialize_game",
    "simplex_optimize",
    "simplex_solve",
    "sink_reachable_set",
    "solve",
    "solve_avg_free",
    "solve_value_vector",
    "transform_error_bound",
    "validate_game",
    "validate_strategy",
    "value_iteration",
    "value_separation",
    "verify_ovv_certificate",
    "verify_transform_bound",
    "verify_value_certificate",
    "vi_iterates",
    "zero_value_set",
]
