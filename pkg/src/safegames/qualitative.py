"""Probability-0/1 analyses: sure/almost-sure safety sets, zero-reachability
sets and attractors. All fixpoints are graph computations; no arithmetic.

Almost-sure safety in a concurrent game coincides with sure safety. At a
state where every player-1 move has some escaping counter-move, the uniform
player-2 selector escapes with probability at least
``min_prob / |moves2(s)|`` per visit, so positive-probability visits there
already cap the value below 1.
"""

from __future__ import annotations

from collections import defaultdict, deque
from typing import Dict, Iterable, List, Set, Tuple

from fractions import Fraction

from .model import P1, P2, RANDOM, ConcurrentGame, Selector, TurnBasedGame

__all__ = [
    "safe_fixpoint",
    "almost_sure_safe_concurrent",
    "almost_sure_safe_turn_based",
    "zero_reach_states",
    "attractor_selector",
]


def safe_fixpoint(game: ConcurrentGame, safe: Iterable[str], player: int = 1) -> Set[str]:
    """Greatest X within ``safe`` where ``player`` has a move keeping every
    successor in X against all opponent moves."""
    opp = 3 - player
    alive = set(safe)
    # (s, m) -> number of opponent moves whose successors leave alive
    bad = defaultdict(int)
    good_moves = {}
    watchers: Dict[str, List[Tuple[str, str, str]]] = defaultdict(list)
    dead = deque()

    def triple(s, m, o):
        return (s, m, o) if player == 1 else (s, o, m)

    for s in game.states:
        if s not in alive:
            continue
        good = 0
        for m in game.moves(player, s):
            for o in game.moves(opp, s):
                succ = game.delta[triple(s, m, o)]
                if any(t not in alive for t in succ):
                    bad[(s, m)] += 1
                else:
                    for t in succ:
                        watchers[t].append((s, m, o))
            good += bad[(s, m)] == 0
        good_moves[s] = good
        if good == 0:
            dead.append(s)
    broken = set()
    while dead:
        t = dead.popleft()
        if t not in alive:
            continue
        alive.discard(t)
        for s, m, o in watchers[t]:
            if s not in alive or (s, m, o) in broken:
                continue
            broken.add((s, m, o))
            bad[(s, m)] += 1
            if bad[(s, m)] == 1:
                good_moves[s] -= 1
                if good_moves[s] == 0:
                    dead.append(s)
    return alive


def almost_sure_safe_concurrent(game: ConcurrentGame, safe: Iterable[str]):
    """States where player 1 keeps the play in ``safe`` with probability 1.

    Returns ``(W1, witness)``; the witness is a pure selector defined on W1
    that plays the first move (declaration order) keeping every successor in
    W1.
    """
    w1 = safe_fixpoint(game, safe, 1)
    dist = {}
    for s in game.states:
        if s not in w1:
            continue
        for a in game.moves1[s]:
            if all(set(game.delta[(s, a, b)]) <= w1 for b in game.moves2[s]):
                dist[s] = {a: Fraction(1)}
                break
    return w1, Selector(1, dist)


def almost_sure_safe_turn_based(game: TurnBasedGame, safe: Iterable[str]):
    """Almost-sure winning set for Safe(``safe``) in a turn-based game.

    Returns ``(A, strategy)``: a pure selector on the player-1 states of A
    choosing the first successor inside A.
    """
    alive = set(safe)
    preds: Dict[str, List[str]] = defaultdict(list)
    inside = {}
    for s in game.states:
        for t in game.edges[s]:
            preds[t].append(s)
    dead = deque()
    for s in game.states:
        if s not in alive:
            continue
        n_in = sum(t in alive for t in game.edges[s])
        inside[s] = n_in
        if game.owner[s] == P1:
            if n_in == 0:
                dead.append(s)
        elif n_in < len(game.edges[s]):
            dead.append(s)
    while dead:
        t = dead.popleft()
        if t not in alive:
            continue
        alive.discard(t)
        for s in preds[t]:
            if s not in alive:
                continue
            inside[s] -= 1
            if game.owner[s] != P1 or inside[s] == 0:
                dead.append(s)
    dist = {}
    for s in game.states:
        if s in alive and game.owner[s] == P1:
            t = next(t for t in game.edges[s] if t in alive)
            dist[s] = {t: Fraction(1)}
    return alive, Selector(1, dist)


def zero_reach_states(game, target: Iterable[str], player: int = 1) -> Set[str]:
    """States from which ``player`` cannot reach ``target`` with positive
    probability."""
    reach = set(target)
    if isinstance(game, TurnBasedGame):
        mine = P1 if player == 1 else P2
        changed = True
        while changed:
            changed = False
            for s in game.states:
                if s in reach:
                    continue
                succ = game.edges[s]
                if game.owner[s] in (mine, RANDOM):
                    join = any(t in reach for t in succ)
                else:
                    join = all(t in reach for t in succ)
                if join:
                    reach.add(s)
                    changed = True
        return set(game.states) - reach
    opp = 3 - player
    changed = True
    while changed:
        changed = False
        for s in game.states:
            if s in reach:
                continue
            for m in game.moves(player, s):
                keys = [(s, m, o) if player == 1 else (s, o, m) for o in game.moves(opp, s)]
                if all(any(t in reach for t in game.delta[k]) for k in keys):
                    reach.add(s)
                    changed = True
                    break
    return set(game.states) - reach


def attractor_selector(game: TurnBasedGame, target: Iterable[str]):
    """Staged player-1 attractor of ``target`` and its pure selector.

    Returns ``(stages, selector)`` with ``stages[0] == target`` and
    ``stages[-1]`` the whole state space. Raises ValueError when the
    attractor falls short of the state space.
    """
    current = frozenset(target)
    stages = [current]
    choice = {}
    while len(current) < len(game.states):
        new = set()
        for s in game.states:
            if s in current:
                continue
            succ = game.edges[s]
            kind = game.owner[s]
            if kind == P2:
                if all(t in current for t in succ):
                    new.add(s)
            elif any(t in current for t in succ):
                new.add(s)
                if kind == P1:
                    choice[s] = next(t for t in succ if t in current)
        if not new:
            raise ValueError("attractor does not cover state space")
        current = current | new
        stages.append(current)
    dist = {}
    for s in game.states_of(P1):
        dist[s] = {choice.get(s, game.edges[s][0]): Fraction(1)}
    return stages, Selector(1, dist)
