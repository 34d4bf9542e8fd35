"""Reachability companions of the safety solver and the bounds built on them.

* ``anytime_solve``: lower bounds from strategy improvement, upper bounds
  from player-2 reachability value iteration, stopped on a certified gap.
* ``tb_reach_strategy_improvement``: exact reachability for turn-based games
  by switching pure selectors, started from an attractor selector.
* ``binary_transform`` / ``termination_bound``: fair-coin normal form and
  the iteration bounds stated for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

from .improve import (
    EPSILON_GAP,
    EXACT_TERMINATION,
    UPPER_STABLE,
    SolveReport,
    solve_safety,
)
from .mdp import min_reach_value
from .model import (
    NOOP,
    P1,
    RANDOM,
    ConcurrentGame,
    Selector,
    TurnBasedGame,
    fix_selector,
    make_absorbing,
)
from .qualitative import attractor_selector, zero_reach_states
from .valueiter import reach_step

__all__ = [
    "SandwichReport",
    "anytime_solve",
    "ReachResult",
    "tb_reach_strategy_improvement",
    "full_selector",
    "is_binary",
    "binary_transform",
    "binary_transform_with_origin",
    "TerminationBound",
    "termination_bound",
    "swap_players",
]

_ZERO, _ONE, _HALF = Fraction(0), Fraction(1), Fraction(1, 2)


# --------------------------------------------------------------------------
# anytime sandwich


@dataclass
class SandwichReport:
    lower: List[Dict[str, Fraction]]
    upper: List[Dict[str, Fraction]]
    gap: Fraction
    stop_reason: str
    lower_bound: Dict[str, Fraction]
    upper_bound: Dict[str, Fraction]
    solve: Optional[SolveReport] = field(default=None, repr=False)


def anytime_solve(game, safe, epsilon, *, max_iter: int = 10_000, vi_rounds: int = 1,
                  precision: Optional[int] = 40, selector_precision: Optional[int] = 24,
                  stop_on_terminal: bool = True) -> SandwichReport:
    """Bracket the safety value within ``epsilon``.

    Upper iterates are rounded up to multiples of ``2**-precision``, which
    keeps them sound while capping their size; ``precision=None`` keeps
    them exact. ``selector_precision`` rounds the lower side's selectors
    (see :func:`~safegames.improve.improvement_step`); lower iterates stay
    valid and monotone, and ``None`` gives the exact algorithm. With
    ``stop_on_terminal=False`` an exact lower side does not
    end the run, and value iteration continues until the gap closes.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    rep = solve_safety(game, safe, max_iter=max_iter, epsilon=epsilon,
                       upper_bound="value-iteration", vi_rounds=vi_rounds, precision=precision,
                       selector_precision=selector_precision)
    lower = [r.valuation for r in rep.records]
    upper = list(rep.upper)
    lo, hi, stop = rep.lower_bound, rep.upper_bound, rep.stop_reason

    if stop == EXACT_TERMINATION and not stop_on_terminal:
        safe = frozenset(safe)
        unsafe = set(game.states) - safe
        processed = make_absorbing(game, rep.w1 | unsafe)
        u = {s: _ONE - x for s, x in upper[-1].items()}
        v = rep.final_valuation
        rounds = 0
        while True:
            if all(v[s] + u[s] >= _ONE - epsilon for s in game.states):
                stop = EPSILON_GAP
                break
            nxt, exact = reach_step(processed, unsafe, u, 2, precision)
            stable = exact and nxt == u
            u = nxt
            upper.append({s: _ONE - x for s, x in u.items()})
            rounds += 1
            if stable:
                stop = UPPER_STABLE
                break
            if rounds >= max_iter:
                break
        lo, hi = dict(v), dict(upper[-1])
        if stop == UPPER_STABLE:
            lo = dict(hi)
    gap = max(hi[s] - lo[s] for s in game.states) if game.states else _ZERO
    return SandwichReport(lower, upper, gap, stop, lo, hi, rep)


def swap_players(game: ConcurrentGame) -> ConcurrentGame:
    """Same game with the two players' roles exchanged."""
    delta = {(s, b, a): d for (s, a, b), d in game.delta.items()}
    return ConcurrentGame(game.states, game.moves2, game.moves1, delta)


# --------------------------------------------------------------------------
# turn-based reachability


class ReachResult(NamedTuple):
    values: Dict[str, Fraction]
    selector: Selector
    iterations: int
    history: List[Dict[str, Fraction]]
    selectors: List[Selector]


def full_selector(game: TurnBasedGame, sel: Selector) -> Selector:
    """Extend a selector on the player-1 states of a turn-based game to the
    concurrent view (NOOP elsewhere)."""
    dist = {}
    for s in game.states:
        dist[s] = dict(sel[s]) if game.owner[s] == P1 else {NOOP: _ONE}
    return Selector(1, dist)


def _evaluate(conc: ConcurrentGame, game: TurnBasedGame, sel: Selector, target) -> Dict[str, Fraction]:
    return min_reach_value(fix_selector(conc, full_selector(game, sel)), target)


def tb_reach_strategy_improvement(game: TurnBasedGame, target) -> ReachResult:
    """Exact player-1 reachability values and a pure optimal selector.

    Every improvable player-1 state switches, per round, to its first edge
    (declaration order) whose value beats the current one.
    """
    target = frozenset(target)
    conc = game.to_concurrent()
    hopeless = zero_reach_states(game, target, 1)
    _, sel = attractor_selector(game, set(hopeless) | target)
    history, selectors = [], []
    while True:
        u = _evaluate(conc, game, sel, target)
        history.append(u)
        selectors.append(sel)
        updates = {}
        for s in game.states_of(P1):
            if s in target:
                continue
            for t in game.edges[s]:
                if u[t] > u[s]:
                    updates[s] = {t: _ONE}
                    break
        if not updates:
            return ReachResult(u, sel, len(history), history, selectors)
        sel = sel.replace(updates)


# --------------------------------------------------------------------------
# binary normal form


def is_binary(game: TurnBasedGame) -> bool:
    """Every random state flips a fair coin over at most two successors."""
    for s in game.states_of(RANDOM):
        d = game.delta[s]
        if len(d) > 2 or (len(d) == 2 and set(d.values()) != {_HALF}):
            return False
    return True


def _coin_tree(s: str, dist: List[Tuple[str, Fraction]]):
    """Fair-coin tree realizing ``dist`` from root ``s``.

    Outcomes take consecutive blocks of the ``2**m`` codewords; leftover
    codewords lead back to ``s``. Subtrees with a single outcome collapse to
    that outcome. Returns ``(root_children, aux)`` where ``aux`` maps each
    auxiliary state to its two children.
    """
    q = math.lcm(*(p.denominator for _, p in dist))
    m = max(1, (q - 1).bit_length())
    blocks = []
    lo = 0
    for t, p in dist:
        n = int(p * q)
        blocks.append((lo, lo + n, t))
        lo += n
    blocks.append((q, 1 << m, s))

    def outcome(lo, hi):
        hit = {t for a, b, t in blocks if a < hi and b > lo}
        return hit.pop() if len(hit) == 1 else None

    aux: Dict[str, Tuple[str, str]] = {}

    def build(path, lo, hi):
        single = outcome(lo, hi)
        if single is not None:
            return single
        mid = (lo + hi) // 2
        name = f"{s}~b{path}"
        aux[name] = (build(path + "0", lo, mid), build(path + "1", mid, hi))
        return name

    half = 1 << (m - 1)
    return (build("0", 0, half), build("1", half, 1 << m)), aux


def binary_transform_with_origin(game: TurnBasedGame):
    """Binary transform plus a map from each state to the original state it
    serves."""
    states = list(game.states)
    owner = dict(game.owner)
    edges = dict(game.edges)
    delta = {s: dict(d) for s, d in game.delta.items()}
    origin = {s: s for s in game.states}
    taken = set(states)
    for s in game.states_of(RANDOM):
        d = game.delta[s]
        if len(d) == 1 or (len(d) == 2 and set(d.values()) == {_HALF}):
            continue
        dist = [(t, d[t]) for t in game.edges[s] if t in d]
        (c0, c1), aux = _coin_tree(s, dist)
        clash = taken & set(aux)
        if clash:
            raise ValueError(f"auxiliary state name collides with {sorted(clash)[0]!r}")
        edges[s] = (c0, c1)
        delta[s] = {c0: _HALF, c1: _HALF}
        for name, (a, b) in aux.items():
            states.append(name)
            taken.add(name)
            owner[name] = RANDOM
            edges[name] = (a, b)
            delta[name] = {a: _HALF, b: _HALF}
            origin[name] = s
    return TurnBasedGame(states, owner, edges, delta), origin


def binary_transform(game: TurnBasedGame) -> TurnBasedGame:
    return binary_transform_with_origin(game)[0]


class TerminationBound(NamedTuple):
    step_bound: int
    strategy_bound: int
    transformed: bool
    n_states: int
    n_random: int

    @property
    def bound(self) -> int:
        return min(self.step_bound, self.strategy_bound)


def termination_bound(game: TurnBasedGame) -> TerminationBound:
    """``|S| * 4**(|S_R| - 1)`` and the number of pure player-1 selectors,
    on the binary transform when the game is not binary already."""
    transformed = not is_binary(game)
    if transformed:
        game = binary_transform(game)
    n_random = len(game.states_of(RANDOM))
    step = len(game.states) * 4 ** max(n_random - 1, 0)
    strategies = math.prod(len(game.edges[s]) for s in game.states_of(P1))
    return TerminationBound(step, strategies, transformed, len(game.states), n_random)
