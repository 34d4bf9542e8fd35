"""Value iteration on concurrent games, exact or with outward rounding.

Exact iteration can blow up: the value of a 2x2 matrix game has roughly
twice the bits of its entries, so denominators can square every round. With
``precision=p`` each iterate is rounded to a multiple of ``2**-p`` in the
sound direction (down for reachability, up for the safety upper bound). The
operators are monotone, so rounded iterates remain valid one-sided bounds and
still move monotonically.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .matrix import pre1
from .model import ConcurrentGame, TurnBasedGame, valuation

__all__ = [
    "round_to_grid",
    "reach_step",
    "safe_step",
    "value_iteration_reach",
    "value_iteration_safe_upper",
]

_ONE = Fraction(1)


def round_to_grid(x: Fraction, precision: Optional[int], up: bool) -> Fraction:
    if precision is None:
        return x
    scale = 1 << precision
    q, r = divmod(x.numerator * scale, x.denominator)
    if r and up:
        q += 1
    return Fraction(q, scale)


def _concurrent(game):
    return game.to_concurrent() if isinstance(game, TurnBasedGame) else game


def reach_step(
    game: ConcurrentGame,
    target,
    u: Mapping[str, Fraction],
    player: int = 1,
    precision: Optional[int] = None,
) -> Tuple[Dict[str, Fraction], bool]:
    """One round of reachability value iteration for ``player``.

    Returns the next iterate and whether it was computed without rounding.
    """
    out, exact = {}, True
    for s in game.states:
        if s in target:
            out[s] = _ONE
            continue
        if player == 1:
            x = pre1(game, s, u)
        else:
            # Player 2 maximizes u, i.e. player 1 maximizes 1 - u.
            x = _ONE - pre1(game, s, {t: _ONE - w for t, w in u.items()})
        r = round_to_grid(x, precision, up=False)
        exact &= r == x
        out[s] = r
    return out, exact


def safe_step(game, safe, v, precision=None) -> Tuple[Dict[str, Fraction], bool]:
    out, exact = {}, True
    for s in game.states:
        if s not in safe:
            out[s] = Fraction(0)
            continue
        x = pre1(game, s, v)
        r = round_to_grid(x, precision, up=True)
        exact &= r == x
        out[s] = r
    return out, exact


def value_iteration_reach(game, target: Iterable[str], player: int = 1, rounds: int = 10,
                          precision: Optional[int] = None) -> List[Dict[str, Fraction]]:
    """Iterates ``u_0 .. u_rounds`` converging from below to the value of
    Reach(``target``) for ``player``."""
    game = _concurrent(game)
    target = set(target)
    u = valuation(game.states, target)
    out = [u]
    for _ in range(rounds):
        u, _ = reach_step(game, target, u, player, precision)
        out.append(u)
    return out


def value_iteration_safe_upper(game, safe: Iterable[str], rounds: int = 10,
                               precision: Optional[int] = None) -> List[Dict[str, Fraction]]:
    """Iterates converging from above to the player-1 value of Safe(``safe``)."""
    game = _concurrent(game)
    safe = set(safe)
    v = valuation(game.states, safe)
    out = [v]
    for _ in range(rounds):
        v, _ = safe_step(game, safe, v, precision)
        out.append(v)
    return out
