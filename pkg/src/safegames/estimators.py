"""Estimator-style wrappers around the solvers.

``fit(game, states)`` solves and stores the results in trailing-underscore
attributes; ``predict(states)`` returns the fitted values for the given
states. Hyperparameters live in ``__init__`` so ``get_params`` and
``set_params`` work as in scikit-learn.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bounds import anytime_solve, tb_reach_strategy_improvement
from .improve import solve_safety
from .model import TurnBasedGame
from .validation import check_game, check_rational, check_states
from .valueiter import value_iteration_reach

__all__ = [
    "SafetyStrategyImprovement",
    "AnytimeSafetySolver",
    "TurnBasedReachability",
    "ReachValueIteration",
]


class _ValueEstimator(BaseEstimator):
    def _check_fitted(self):
        if not hasattr(self, "values_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def predict(self, states=None) -> List[Fraction]:
        self._check_fitted()
        if states is None:
            states = list(self.values_)
        unknown = [s for s in states if s not in self.values_]
        if unknown:
            raise KeyError(f"unknown states {unknown}")
        return [self.values_[s] for s in states]


class SafetyStrategyImprovement(_ValueEstimator):
    """Strategy improvement for a player-1 safety objective.

    Parameters
    ----------
    max_iter : int
        Cap on the number of evaluated selectors.
    epsilon : Fraction or None
        Gap for the value-iteration stop rule; only used with
        ``upper_bound="value-iteration"``.
    upper_bound : None or "value-iteration"
    precision : int or None
        Grid exponent for rounding the upper iterates.
    """

    def __init__(self, max_iter: int = 10_000, epsilon=None, upper_bound: Optional[str] = None,
                 vi_rounds: int = 1, precision: Optional[int] = None):
        self.max_iter = max_iter
        self.epsilon = epsilon
        self.upper_bound = upper_bound
        self.vi_rounds = vi_rounds
        self.precision = precision

    def fit(self, game, safe):
        check_game(game)
        safe = check_states(game, safe, "safe set")
        eps = None if self.epsilon is None else check_rational(self.epsilon, "epsilon")
        rep = solve_safety(
            game, safe, max_iter=self.max_iter, epsilon=eps, upper_bound=self.upper_bound,
            vi_rounds=self.vi_rounds, precision=self.precision,
        )
        self.report_ = rep
        self.values_ = rep.final_valuation
        self.selector_ = rep.final_selector
        self.n_iter_ = rep.n_iter
        self.terminated_ = rep.terminated
        return self


class AnytimeSafetySolver(_ValueEstimator):
    """Lower and upper bounds on the safety value, ``epsilon`` apart."""

    def __init__(self, epsilon="1/10000", max_iter: int = 10_000, vi_rounds: int = 1,
                 precision: Optional[int] = 40, stop_on_terminal: bool = True):
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.vi_rounds = vi_rounds
        self.precision = precision
        self.stop_on_terminal = stop_on_terminal

    def fit(self, game, safe):
        check_game(game)
        safe = check_states(game, safe, "safe set")
        eps = check_rational(self.epsilon, "epsilon", positive=True)
        rep = anytime_solve(game, safe, eps, max_iter=self.max_iter, vi_rounds=self.vi_rounds,
                            precision=self.precision, stop_on_terminal=self.stop_on_terminal)
        self.report_ = rep
        self.values_ = rep.lower_bound
        self.upper_ = rep.upper_bound
        self.gap_ = rep.gap
        return self


class TurnBasedReachability(_ValueEstimator):
    """Exact reachability values of a turn-based game by selector switching."""

    def fit(self, game: TurnBasedGame, target):
        if not isinstance(game, TurnBasedGame):
            raise TypeError("TurnBasedReachability needs a TurnBasedGame")
        check_game(game)
        target = check_states(game, target, "target")
        res = tb_reach_strategy_improvement(game, target)
        self.values_ = res.values
        self.selector_ = res.selector
        self.n_iter_ = res.iterations
        return self


class ReachValueIteration(_ValueEstimator):
    def __init__(self, rounds: int = 100, player: int = 1, precision: Optional[int] = None):
        self.rounds = rounds
        self.player = player
        self.precision = precision

    def fit(self, game, target):
        check_game(game)
        target = check_states(game, target, "target")
        if self.player not in (1, 2):
            raise ValueError("player must be 1 or 2")
        self.iterates_ = value_iteration_reach(game, target, self.player, self.rounds, self.precision)
        self.values_ = self.iterates_[-1]
        return self
