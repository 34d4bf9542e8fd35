"""Analysis of games in which one side is fixed (MDPs and Markov chains)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from .lp import OPTIMAL, LinearProgram, solve_lp
from .model import ConcurrentGame, Selector, TurnBasedGame, fix_selector, make_absorbing
from .qualitative import safe_fixpoint

__all__ = [
    "EndComponent",
    "mec_decomposition",
    "max_reach_value",
    "min_reach_value",
    "safety_value_under",
    "is_proper",
]

_ZERO, _ONE = Fraction(0), Fraction(1)


@dataclass(frozen=True)
class EndComponent:
    states: frozenset
    moves: Mapping[str, Tuple[str, ...]]


def _actions(mdp: ConcurrentGame):
    """Map state -> [(move, successor support)] for the free player."""
    player = mdp.mdp_player()
    if player is None:
        raise ValueError("expected an MDP: one player must have a single move everywhere")
    out = {}
    for s in mdp.states:
        acts = []
        for a in mdp.moves1[s]:
            for b in mdp.moves2[s]:
                acts.append((a if player == 1 else b, frozenset(mdp.delta[(s, a, b)])))
        out[s] = acts
    return out


def mec_decomposition(mdp: ConcurrentGame, states: Optional[Iterable[str]] = None) -> List[EndComponent]:
    """Maximal end components of ``mdp`` lying inside ``states`` (default all).

    Iterated SCC refinement: drop actions that leave their state's SCC,
    drop states left without actions, repeat until stable.
    """
    acts = _actions(mdp)
    alive = set(mdp.states if states is None else states)
    allowed = {s: [(m, d) for m, d in acts[s] if d <= alive] for s in alive}
    while True:
        dead = {s for s in alive if not allowed[s]}
        while dead:
            alive -= dead
            for s in alive:
                allowed[s] = [(m, d) for m, d in allowed[s] if d <= alive]
            dead = {s for s in alive if not allowed[s]}
        graph = nx.DiGraph()
        graph.add_nodes_from(alive)
        graph.add_edges_from((s, t) for s in alive for _, d in allowed[s] for t in d)
        comp = {}
        for k, scc in enumerate(nx.strongly_connected_components(graph)):
            for s in scc:
                comp[s] = k
        changed = False
        for s in alive:
            keep = [(m, d) for m, d in allowed[s] if all(comp[t] == comp[s] for t in d)]
            if len(keep) != len(allowed[s]):
                allowed[s] = keep
                changed = True
        if not changed:
            break
    groups: Dict[int, List[str]] = {}
    for s in mdp.states:
        if s in alive:
            groups.setdefault(comp[s], []).append(s)
    out = [
        EndComponent(frozenset(g), {s: tuple(m for m, _ in allowed[s]) for s in g})
        for g in groups.values()
    ]
    out.sort(key=lambda ec: min(mdp.index[s] for s in ec.states))
    return out


def _can_reach(mdp: ConcurrentGame, target) -> set:
    preds: Dict[str, set] = {s: set() for s in mdp.states}
    for (s, _, _), d in mdp.delta.items():
        for t in d:
            preds[t].add(s)
    seen = set(target)
    stack = list(seen)
    while stack:
        t = stack.pop()
        for s in preds[t]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def max_reach_value(mdp: ConcurrentGame, target: Iterable[str]) -> Dict[str, Fraction]:
    """Maximal probability of reaching ``target`` in an MDP, exactly.

    Solves ``min sum x`` subject to ``x(s) >= sum_t x(t) delta(s, a)(t)`` for
    every action, ``x = 1`` on the target and ``0 <= x <= 1``. States that
    cannot reach the target at all are fixed to 0 up front.
    """
    _actions(mdp)  # rejects non-MDPs
    target = set(target)
    live = _can_reach(mdp, target)
    unknown = [s for s in mdp.states if s in live and s not in target]
    x = {s: (_ONE if s in target else _ZERO) for s in mdp.states}
    if not unknown:
        return x
    name = {s: f"x{i}" for i, s in enumerate(unknown)}
    lp = LinearProgram(
        [name[s] for s in unknown],
        {name[s]: 1 for s in unknown},
        "min",
        bounds={name[s]: (_ZERO, _ONE) for s in unknown},
    )
    for s in unknown:
        for _, d in _rows(mdp, s):
            coeffs = {name[s]: _ONE}
            rhs = _ZERO
            for t, p in d.items():
                if t in name:
                    coeffs[name[t]] = coeffs.get(name[t], _ZERO) - p
                elif t in target:
                    rhs += p
            lp.add(coeffs, ">=", rhs)
    res = solve_lp(lp)
    if res.status != OPTIMAL:
        raise ArithmeticError(f"reachability LP returned {res.status}")
    for s in unknown:
        x[s] = res.assignment[name[s]]
    return x


def _rows(mdp, s):
    for a in mdp.moves1[s]:
        for b in mdp.moves2[s]:
            yield (a, b), mdp.delta[(s, a, b)]


def min_reach_value(mdp: ConcurrentGame, target: Iterable[str]) -> Dict[str, Fraction]:
    """Minimal probability of reaching ``target`` in an MDP, exactly.

    The minimizer avoids the target with the probability of reaching the
    set where it can avoid it surely.
    """
    target = set(target)
    player = mdp.mdp_player()
    absorbed = make_absorbing(mdp, target)
    avoid = safe_fixpoint(absorbed, set(mdp.states) - target, player)
    reach = max_reach_value(absorbed, avoid)
    return {s: _ONE - reach[s] for s in mdp.states}


def safety_value_under(game: ConcurrentGame, gamma: Selector, safe: Iterable[str]) -> Dict[str, Fraction]:
    """Value player 1 secures for Safe(``safe``) by playing ``gamma`` forever."""
    target = set(game.states) - set(safe)
    reach = max_reach_value(fix_selector(game, gamma), target)
    return {s: _ONE - r for s, r in reach.items()}


def is_proper(game, xi1: Selector, target: Iterable[str], hopeless: Iterable[str]) -> bool:
    """True iff under ``xi1`` no end component avoids ``target`` and ``hopeless``."""
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    mdp = fix_selector(game, xi1)
    rest = set(game.states) - set(target) - set(hopeless)
    return not mec_decomposition(mdp, rest)
