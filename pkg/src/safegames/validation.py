"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .exceptions import InvalidGameError
from .model import ConcurrentGame, Selector, TurnBasedGame, Violation, validate_game

__all__ = ["check_game", "check_states", "check_rational", "check_valuation", "check_selector"]


def check_game(game):
    if not isinstance(game, (ConcurrentGame, TurnBasedGame)):
        raise TypeError(f"expected ConcurrentGame or TurnBasedGame, got {type(game).__name__}")
    bad = validate_game(game)
    if bad:
        raise InvalidGameError(bad)
    return game


def check_states(game, states: Iterable[str], what: str = "states") -> frozenset:
    if isinstance(states, str):
        raise TypeError(f"{what} must be a collection of state ids, not a string")
    states = frozenset(states)
    unknown = sorted(states - set(game.states))
    if unknown:
        raise InvalidGameError([Violation("unknown-state", t, what) for t in unknown])
    return states


def check_rational(x, what: str = "value", positive: bool = False) -> Fraction:
    """Accept Fraction, int or a ``"p/q"`` string. Floats are refused."""
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"{what} must be exact (Fraction, int or 'p/q'), got {x!r}")
    try:
        r = Fraction(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"{what}: malformed rational {x!r}") from exc
    if positive and r <= 0:
        raise ValueError(f"{what} must be positive, got {r}")
    return r


def check_valuation(game, v: Mapping[str, object]) -> dict:
    out = {}
    for s in game.states:
        if s not in v:
            raise ValueError(f"valuation missing state {s!r}")
        r = check_rational(v[s], f"valuation[{s!r}]")
        if not 0 <= r <= 1:
            raise ValueError(f"valuation[{s!r}] = {r} outside [0, 1]")
        out[s] = r
    extra = set(v) - set(game.states)
    if extra:
        raise ValueError(f"valuation names unknown states {sorted(extra)}")
    return out


def check_selector(game, sel: Selector) -> Selector:
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    bad = sel.check(game)
    if bad:
        raise InvalidGameError(bad)
    return sel
