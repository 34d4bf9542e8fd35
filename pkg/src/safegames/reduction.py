"""Turn-based reduction of a concurrent game around a valuation.

Player 1 first commits to a support A together with the counter-optimal set
B it induces, player 2 then picks a counter-optimal move b in B, and a
random state spreads uniformly over the successors any a in A can produce
against b.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .matrix import opt_sel_count
from .model import P1, P2, RANDOM, ConcurrentGame, Selector, TurnBasedGame

__all__ = ["ReducedGame", "tb_reduce", "lift_strategy", "pair_name", "choice_name"]


def _fmt(moves) -> str:
    return "{" + ",".join(moves) + "}"


def pair_name(s: str, A, B) -> str:
    return f"{s}#{_fmt(A)}#{_fmt(B)}"


def choice_name(s: str, A, b: str) -> str:
    return f"{s}#{_fmt(A)}#{b}"


@dataclass(frozen=True, eq=False)
class ReducedGame:
    game: TurnBasedGame
    safe: frozenset
    # reduced state -> ("base", s) | ("pair", s, A, B) | ("choice", s, A, b)
    origin: Mapping[str, tuple]
    witness: Mapping[str, Dict[str, Fraction]]  # pair state -> selector at s


def tb_reduce(game: ConcurrentGame, v: Mapping[str, Fraction], safe: Iterable[str]) -> ReducedGame:
    safe = set(safe)
    states = list(game.states)
    owner = {s: P1 for s in game.states}
    edges: Dict[str, Tuple[str, ...]] = {}
    delta = {}
    origin = {s: ("base", s) for s in game.states}
    witness = {}
    extra = []
    for s in game.states:
        pairs = opt_sel_count(game, s, v)
        out = []
        for A, B, xi in pairs:
            p = pair_name(s, A, B)
            out.append(p)
            extra.append(p)
            owner[p] = P2
            origin[p] = ("pair", s, A, B)
            witness[p] = xi
            choices = []
            for b in B:
                c = choice_name(s, A, b)
                choices.append(c)
                if c in owner:
                    # pairs with the same support share their choice states
                    continue
                extra.append(c)
                owner[c] = RANDOM
                origin[c] = ("choice", s, A, b)
                reach = set()
                for a in A:
                    reach.update(game.delta[(s, a, b)])
                succ = tuple(t for t in game.states if t in reach)
                edges[c] = succ
                delta[c] = {t: Fraction(1, len(succ)) for t in succ}
            edges[p] = tuple(choices)
        edges[s] = tuple(out)
    states.extend(extra)
    reduced_safe = frozenset(t for t in states if origin[t][1] in safe)
    return ReducedGame(TurnBasedGame(states, owner, edges, delta), reduced_safe, origin, witness)


def lift_strategy(reduced: ReducedGame, strategy: Selector, base: Selector, states: Iterable[str]) -> Selector:
    """Install, at each state in ``states``, the witness selector of the
    (A, B) pair that ``strategy`` picks in the reduced game."""
    updates = {}
    for s in states:
        (target,) = [t for t, p in strategy[s].items() if p]
        info = reduced.origin.get(target)
        if info is None or info[0] != "pair" or info[1] != s:
            raise ValueError(f"strategy at {s!r} does not pick a pair state of {s!r}")
        updates[s] = dict(reduced.witness[target])
    return base.replace(updates)
