"""One-shot zero-sum matrix games and the one-step Pre operators.

The row player (player 1) maximizes. Every operator here is exact; equality
tests between values are plain ``==`` on fractions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Sequence, Tuple

from .exceptions import ResourceLimitError
from .lp import OPTIMAL, LinearProgram, solve_lp, solve_max_slack
from .model import ConcurrentGame, Selector

__all__ = [
    "MatrixGame",
    "Solution",
    "SupportPair",
    "local_matrix",
    "game_value",
    "pre_both",
    "pre_fixed1",
    "pre1",
    "pre1_all",
    "is_opt_sel",
    "count_opt",
    "opt_sel_count",
    "subset_cap",
]

_ZERO = Fraction(0)


@dataclass(frozen=True)
class MatrixGame:
    rows: Tuple[str, ...]
    cols: Tuple[str, ...]
    payoff: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.payoff) != len(self.rows) or any(len(r) != len(self.cols) for r in self.payoff):
            raise ValueError("payoff dimensions do not match move lists")

    def row_payoffs(self, xi: Mapping[str, Fraction]) -> List[Fraction]:
        """Expected payoff of each column against row mixture ``xi``."""
        out = [_ZERO] * len(self.cols)
        for i, a in enumerate(self.rows):
            w = xi.get(a, 0)
            if w:
                for j, e in enumerate(self.payoff[i]):
                    out[j] += w * e
        return out

    def bilinear(self, xi1: Mapping[str, Fraction], xi2: Mapping[str, Fraction]) -> Fraction:
        return sum(
            (xi2.get(b, 0) * p for b, p in zip(self.cols, self.row_payoffs(xi1))), _ZERO
        )


class Solution(NamedTuple):
    value: Fraction
    row: Dict[str, Fraction]
    col: Dict[str, Fraction]


class SupportPair(NamedTuple):
    A: Tuple[str, ...]
    B: Tuple[str, ...]
    witness: Dict[str, Fraction]


def _dist_at(xi, s):
    return xi[s] if isinstance(xi, Selector) else xi


def local_matrix(game: ConcurrentGame, s: str, v: Mapping[str, Fraction]) -> MatrixGame:
    rows, cols = game.moves1[s], game.moves2[s]
    payoff = tuple(
        tuple(
            sum((p * v[t] for t, p in game.delta[(s, a, b)].items()), _ZERO) for b in cols
        )
        for a in rows
    )
    return MatrixGame(rows, cols, payoff)


def game_value(m: MatrixGame) -> Solution:
    """Value and optimal mixed strategies of ``m``.

    A pure saddle point is detected directly; otherwise the row and column
    LPs are both solved and their optima are required to coincide.
    """
    row_mins = [min(r) for r in m.payoff]
    col_maxs = [max(m.payoff[i][j] for i in range(len(m.rows))) for j in range(len(m.cols))]
    lo, hi = max(row_mins), min(col_maxs)
    if lo == hi:
        a = m.rows[row_mins.index(lo)]
        b = m.cols[col_maxs.index(hi)]
        return Solution(lo, {a: Fraction(1)}, {b: Fraction(1)})

    primal = LinearProgram(list(m.rows) + ["_z"], {"_z": 1}, "max", bounds={"_z": (None, None)})
    for j in range(len(m.cols)):
        coeffs = {a: m.payoff[i][j] for i, a in enumerate(m.rows)}
        coeffs["_z"] = Fraction(-1)
        primal.add(coeffs, ">=", 0)
    primal.add({a: 1 for a in m.rows}, "=", 1)

    dual = LinearProgram(list(m.cols) + ["_w"], {"_w": 1}, "min", bounds={"_w": (None, None)})
    for i in range(len(m.rows)):
        coeffs = {b: -m.payoff[i][j] for j, b in enumerate(m.cols)}
        coeffs["_w"] = Fraction(1)
        dual.add(coeffs, ">=", 0)
    dual.add({b: 1 for b in m.cols}, "=", 1)

    p, d = solve_lp(primal), solve_lp(dual)
    if p.status != OPTIMAL or d.status != OPTIMAL or p.value != d.value:
        raise ArithmeticError(f"matrix game duality failed: {p.value} != {d.value}")
    row = {a: x for a, x in p.assignment.items() if a != "_z" and x}
    col = {b: y for b, y in d.assignment.items() if b != "_w" and y}
    return Solution(p.value, row, col)


def pre_both(game, s, v, xi1, xi2) -> Fraction:
    return local_matrix(game, s, v).bilinear(_dist_at(xi1, s), _dist_at(xi2, s))


def pre_fixed1(game, s, v, xi1) -> Fraction:
    # The opponent's best reply to a fixed mixture is attained at a pure column.
    return min(local_matrix(game, s, v).row_payoffs(_dist_at(xi1, s)))


def pre1(game, s, v) -> Fraction:
    return game_value(local_matrix(game, s, v)).value


def pre1_all(game, v, states=None) -> Dict[str, Fraction]:
    return {s: pre1(game, s, v) for s in (game.states if states is None else states)}


def is_opt_sel(game, s, v, xi1) -> bool:
    return pre_fixed1(game, s, v, xi1) == pre1(game, s, v)


def count_opt(game, s, v, xi1) -> Tuple[str, ...]:
    m = local_matrix(game, s, v)
    value = game_value(m).value
    payoffs = m.row_payoffs(_dist_at(xi1, s))
    if min(payoffs) != value:
        raise ValueError(f"selector at {s!r} is not optimal for the given valuation")
    return tuple(b for b, p in zip(m.cols, payoffs) if p == value)


def subset_cap() -> int:
    """Per-state budget on enumerated (A, B) pairs; ``SAFEGAMES_SUBSET_CAP``."""
    return int(os.environ.get("SAFEGAMES_SUBSET_CAP", "65536"))


def _subsets(items: Sequence[str]):
    n = len(items)
    for mask in range(1, 1 << n):
        yield tuple(items[i] for i in range(n) if mask >> i & 1)


def _support_lp(m: MatrixGame, value: Fraction, A, B):
    """Feasibility system for an optimal selector supported exactly on A
    whose counter-optimal set is exactly B (B=None: unconstrained)."""
    lp = LinearProgram(list(A), {})
    strict = [lp.add({a: 1}, ">=", 0) for a in A]
    lp.add({a: 1 for a in A}, "=", 1)
    idx = {a: i for i, a in enumerate(m.rows)}
    for j, b in enumerate(m.cols):
        coeffs = {a: m.payoff[idx[a]][j] for a in A}
        if B is None:
            lp.add(coeffs, ">=", value)
        elif b in B:
            lp.add(coeffs, "=", value)
        else:
            strict.append(lp.add(coeffs, ">=", value))
    return lp, strict


def opt_sel_count(game, s, v) -> List[SupportPair]:
    """All realizable (support, counter-optimal set) pairs at ``s``.

    Pairs are enumerated in increasing bitmask order over the declared move
    order. Each pair carries the slack-maximizing optimal selector as its
    witness.
    """
    m = local_matrix(game, s, v)
    value = game_value(m).value
    cap = subset_cap()
    n_pairs = ((1 << len(m.rows)) - 1) * ((1 << len(m.cols)) - 1)
    if n_pairs > cap:
        raise ResourceLimitError(f"OptSelCount subsets at {s!r}", n_pairs, cap)
    out = []
    for A in _subsets(m.rows):
        lp, strict = _support_lp(m, value, A, None)
        res = solve_max_slack(lp, strict)
        if res.status != OPTIMAL or res.slack <= 0:
            continue
        for B in _subsets(m.cols):
            lp, strict = _support_lp(m, value, A, set(B))
            res = solve_max_slack(lp, strict)
            if res.status == OPTIMAL and res.slack > 0:
                out.append(SupportPair(A, B, {a: x for a, x in res.assignment.items() if x}))
    return out
