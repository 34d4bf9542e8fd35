"""Strategy improvement for concurrent safety games.

Each round evaluates the current player-1 selector exactly (an MDP LP),
then either switches to locally optimal selectors where the one-step value
strictly improves, or, when no such state exists, solves a turn-based
reduction around the current valuation to find a region where player 1 can
stay inside its value class forever. When neither applies the current
selector is optimal.

The produced valuations are lower bounds on the game value and increase
monotonically. On games with irrational values the loop never terminates;
``max_iter`` and the optional value-iteration upper bound provide the exits.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional

from .exceptions import ResourceLimitError
from .matrix import game_value, local_matrix, pre_fixed1
from .mdp import safety_value_under
from .model import (
    P1,
    P2,
    RANDOM,
    ConcurrentGame,
    Selector,
    TurnBasedGame,
    make_absorbing,
    mix,
    uniform_selector,
    valuation,
)
from .qualitative import almost_sure_safe_concurrent, almost_sure_safe_turn_based
from .reduction import ReducedGame, lift_strategy, tb_reduce
from .valueiter import reach_step

__all__ = [
    "PRE_STEP",
    "TB_STEP",
    "TERMINAL",
    "EXACT_TERMINATION",
    "ITERATION_CAP",
    "EPSILON_GAP",
    "UPPER_STABLE",
    "IterationRecord",
    "SolveReport",
    "Improvement",
    "initial_selector",
    "round_selector",
    "prepare",
    "improvement_step",
    "solve_safety",
    "enumerate_k_uniform",
    "k_uniform_turn_based",
    "kuniform_budget",
]

PRE_STEP, TB_STEP, TERMINAL = "PreStep", "TbStep", "Terminal"
EXACT_TERMINATION = "ExactTermination"
ITERATION_CAP = "IterationCap"
EPSILON_GAP = "EpsilonGap"
UPPER_STABLE = "UpperStable"

_ONE = Fraction(1)

Valuation = Dict[str, Fraction]


@dataclass(frozen=True)
class IterationRecord:
    index: int
    selector: Selector
    valuation: Valuation
    improved: FrozenSet[str]
    kind: str
    # False when the switch made at this record used a rounded selector
    exact_selectors: bool = True


@dataclass
class SolveReport:
    records: List[IterationRecord]
    terminated: bool
    w1: FrozenSet[str]
    final_selector: Selector
    final_valuation: Valuation
    stop_reason: str
    # Safety upper bounds 1 - u_j from value iteration, when requested.
    upper: List[Valuation] = field(default_factory=list)
    lower_bound: Optional[Valuation] = None
    upper_bound: Optional[Valuation] = None

    @property
    def gap(self) -> Optional[Fraction]:
        if self.upper_bound is None:
            return None
        return max(self.upper_bound[s] - self.lower_bound[s] for s in self.lower_bound)

    @property
    def n_iter(self) -> int:
        return len(self.records)


class Improvement(NamedTuple):
    selector: Selector
    kind: str
    improved: FrozenSet[str]
    reduced: Optional[ReducedGame] = None
    almost_sure: Optional[frozenset] = None
    rounded: FrozenSet[str] = frozenset()


def round_selector(xi: Mapping[str, Fraction], precision: int) -> Dict[str, Fraction]:
    """Round a distribution down to multiples of ``2**-precision``; the
    leftover mass goes to the heaviest move (first in order on ties)."""
    scale = 1 << precision
    units = {a: (p.numerator * scale) // p.denominator for a, p in xi.items()}
    heavy = max(xi, key=lambda a: xi[a])
    units[heavy] += scale - sum(units.values())
    return {a: Fraction(n, scale) for a, n in units.items() if n}


def initial_selector(game: ConcurrentGame) -> Selector:
    return uniform_selector(game, 1)


def prepare(game: ConcurrentGame, safe):
    """Compute W1 and make W1 and the unsafe states absorbing.

    Returns ``(processed_game, W1, witness)``.
    """
    w1, witness = almost_sure_safe_concurrent(game, safe)
    unsafe = set(game.states) - set(safe)
    return make_absorbing(game, w1 | unsafe), frozenset(w1), witness


def improvement_step(game: ConcurrentGame, safe, w1, gamma: Selector, v: Mapping[str, Fraction],
                     verify: bool = True, selector_precision: Optional[int] = None) -> Improvement:
    """One improvement of ``gamma`` given its exact valuation ``v``.

    ``game`` must already have W1 and the unsafe states absorbing (see
    :func:`prepare`). With ``verify`` the valuation is recomputed and a
    mismatch raises ValueError.

    ``selector_precision=p`` replaces each optimal local selector by its
    rounding to the ``2**-p`` grid (then ``2**-2p``, ``2**-4p``) as long as
    the rounded one still strictly improves the state. Without this the
    valuations roughly double in size every round on concurrent games.
    """
    safe = set(safe)
    fixed = set(w1) | (set(game.states) - safe)
    if verify:
        if not all(game.is_absorbing(s) for s in fixed):
            raise ValueError("W1 and unsafe states must be absorbing; use prepare()")
        if safety_value_under(game, gamma, safe) != dict(v):
            raise ValueError("valuation is stale for the given selector")

    improved, updates, rounded = [], {}, []
    for s in game.states:
        if s in fixed:
            continue
        sol = game_value(local_matrix(game, s, v))
        if sol.value > v[s]:
            improved.append(s)
            updates[s] = sol.row
            if selector_precision:
                for p in (selector_precision, 2 * selector_precision, 4 * selector_precision):
                    xi = round_selector(sol.row, p)
                    if xi == sol.row:
                        break
                    if pre_fixed1(game, s, v, xi) > v[s]:
                        updates[s] = xi
                        rounded.append(s)
                        break
    if improved:
        return Improvement(gamma.replace(updates), PRE_STEP, frozenset(improved), rounded=frozenset(rounded))

    reduced = tb_reduce(game, v, safe)
    almost, strategy = almost_sure_safe_turn_based(reduced.game, reduced.safe)
    region = [s for s in game.states if s in almost and s not in w1]
    if region:
        lifted = lift_strategy(reduced, strategy, gamma, region)
        return Improvement(lifted, TB_STEP, frozenset(region), reduced, frozenset(almost))
    return Improvement(gamma, TERMINAL, frozenset(), reduced, frozenset(almost))


def solve_safety(game, safe, *, max_iter: int = 10_000, epsilon: Optional[Fraction] = None,
                 upper_bound: Optional[str] = None, vi_rounds: int = 1,
                 precision: Optional[int] = None,
                 selector_precision: Optional[int] = None) -> SolveReport:
    """Run strategy improvement for Safe(``safe``).

    ``upper_bound="value-iteration"`` interleaves ``vi_rounds`` rounds of
    player-2 reachability value iteration per improvement, recording the
    safety upper bounds ``1 - u_j`` and stopping when ``v_i + u_j >= 1 -
    epsilon`` everywhere or when the iteration reaches an exact fixpoint.
    ``precision`` rounds those upper iterates; ``selector_precision`` is
    passed to :func:`improvement_step`.
    """
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    safe = frozenset(safe)
    if upper_bound not in (None, "value-iteration"):
        raise ValueError(f"unknown upper bound source {upper_bound!r}")
    if upper_bound and epsilon is None:
        epsilon = Fraction(0)
    processed, w1, witness = prepare(game, safe)
    unsafe = set(game.states) - safe

    gamma = initial_selector(processed)
    v = safety_value_under(processed, gamma, safe)
    records: List[IterationRecord] = []
    uppers: List[Valuation] = []
    u = None
    if upper_bound:
        u = valuation(game.states, unsafe)
        uppers.append({s: _ONE - x for s, x in u.items()})

    def gap_closed():
        return all(v[s] + u[s] >= _ONE - epsilon for s in game.states)

    stop = ITERATION_CAP
    for i in range(max_iter):
        step = improvement_step(processed, safe, w1, gamma, v, verify=False,
                                selector_precision=selector_precision)
        records.append(IterationRecord(i, gamma, dict(v), step.improved, step.kind, not step.rounded))
        if step.kind == TERMINAL:
            stop = EXACT_TERMINATION
            break
        if upper_bound:
            if gap_closed():
                stop = EPSILON_GAP
                break
            stable = False
            for _ in range(vi_rounds):
                nxt, exact = reach_step(processed, unsafe, u, 2, precision)
                stable = exact and nxt == u
                u = nxt
                uppers.append({s: _ONE - x for s, x in u.items()})
                if stable:
                    break
            if stable:
                stop = UPPER_STABLE
                break
            if gap_closed():
                stop = EPSILON_GAP
                break
        if i + 1 == max_iter:
            break
        gamma = step.selector
        v = safety_value_under(processed, gamma, safe)

    final = gamma.replace({s: witness[s] for s in w1})
    report = SolveReport(
        records, stop == EXACT_TERMINATION, w1, final, dict(v), stop, uppers,
        lower_bound=dict(v),
    )
    if stop == EXACT_TERMINATION:
        report.upper_bound = dict(v)
    elif stop == UPPER_STABLE:
        report.lower_bound = dict(uppers[-1])
        report.upper_bound = dict(uppers[-1])
    elif uppers:
        report.upper_bound = dict(uppers[-1])
    return report


def kuniform_budget() -> int:
    """Budget on enumerated k-uniform selectors; ``SAFEGAMES_KUNIFORM_BUDGET``."""
    return int(os.environ.get("SAFEGAMES_KUNIFORM_BUDGET", "100000"))


def enumerate_k_uniform(game: ConcurrentGame, s: str, k: int) -> List[Dict[str, Fraction]]:
    """All distributions on the player-1 moves at ``s`` whose probabilities
    are multiples of ``1/j`` for a common ``j <= k``, deduplicated."""
    if k < 1:
        raise ValueError("k must be at least 1")
    moves = game.moves1[s]
    seen, out = set(), []
    budget = kuniform_budget()
    for j in range(1, k + 1):
        # compositions of j into len(moves) nonnegative parts
        for cuts in itertools.combinations_with_replacement(range(j + 1), len(moves) - 1):
            parts = [b - a for a, b in zip((0,) + cuts, cuts + (j,))]
            dist = {a: Fraction(n, j) for a, n in zip(moves, parts) if n}
            key = tuple(sorted(dist.items()))
            if key not in seen:
                seen.add(key)
                out.append(dist)
                if len(out) > budget:
                    raise ResourceLimitError(f"k-uniform selectors at {s!r}", len(out), budget)
    out.sort(key=lambda d: [-d.get(a, 0) for a in moves])
    return out


def k_uniform_turn_based(game: ConcurrentGame, safe, k: int):
    """Turn-based game where player 1 commits to a k-uniform selector before
    player 2 moves. Returns ``(game, safe_set)``."""
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    safe = set(safe)
    states = list(game.states)
    owner = {s: P1 for s in game.states}
    edges, delta = {}, {}
    origin = {s: s for s in game.states}
    total = 0
    budget = kuniform_budget()
    for s in game.states:
        sels = enumerate_k_uniform(game, s, k)
        total += len(sels)
        if total > budget:
            raise ResourceLimitError("k-uniform selectors", total, budget)
        sel_states = []
        for idx, xi in enumerate(sels):
            p = f"{s}#k{idx}"
            sel_states.append(p)
            states.append(p)
            owner[p], origin[p] = P2, s
            choices = []
            for b in game.moves2[s]:
                c = f"{p}#{b}"
                choices.append(c)
                states.append(c)
                owner[c], origin[c] = RANDOM, s
                d = mix(game, s, xi, 1, b)
                edges[c] = tuple(t for t in game.states if t in d)
                delta[c] = {t: d[t] for t in edges[c]}
            edges[p] = tuple(choices)
        edges[s] = tuple(sel_states)
    tb = TurnBasedGame(states, owner, edges, delta)
    return tb, frozenset(t for t in states if origin[t] in safe)
