"""Exact solvers for concurrent and turn-based stochastic safety games."""

from .bounds import (
    SandwichReport,
    TerminationBound,
    anytime_solve,
    binary_transform,
    is_binary,
    tb_reach_strategy_improvement,
    termination_bound,
)
from .estimators import (
    AnytimeSafetySolver,
    ReachValueIteration,
    SafetyStrategyImprovement,
    TurnBasedReachability,
)
from .exceptions import InvalidGameError, ResourceLimitError
from .improve import SolveReport, improvement_step, k_uniform_turn_based, solve_safety
from .io import load_game, loads_game
from .matrix import MatrixGame, game_value, opt_sel_count, pre1
from .mdp import max_reach_value, min_reach_value, safety_value_under
from .model import (
    NOOP,
    P1,
    P2,
    RANDOM,
    ConcurrentGame,
    Objective,
    Selector,
    TurnBasedGame,
    validate_game,
)
from .qualitative import almost_sure_safe_concurrent, almost_sure_safe_turn_based
from .reduction import tb_reduce
from .valueiter import value_iteration_reach, value_iteration_safe_upper

__version__ = "0.1.0"

import types as _types

__all__ = [n for n, o in dict(globals()).items() if not n.startswith("_") and not isinstance(o, _types.ModuleType)]
