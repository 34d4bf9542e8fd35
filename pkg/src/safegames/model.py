"""Game structures over exact rationals.

Probabilities and values are :class:`fractions.Fraction` throughout. A
valuation is a plain mapping ``state -> Fraction``; a selector is a
:class:`Selector` holding one distribution per state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

__all__ = [
    "P1",
    "P2",
    "RANDOM",
    "NOOP",
    "ConcurrentGame",
    "TurnBasedGame",
    "Selector",
    "Objective",
    "Violation",
    "validate_game",
    "dest",
    "dest_selectors",
    "fix_selector",
    "make_absorbing",
    "value_classes",
    "uniform_selector",
    "point",
    "mix",
    "valuation",
    "Dist",
]

P1, P2, RANDOM = "P1", "P2", "R"
# Move name used for the collapsed side of an MDP or a turn-based conversion.
NOOP = "-"

Dist = Dict[str, Fraction]


def point(state: str) -> Dist:
    return {state: Fraction(1)}


@dataclass(frozen=True)
class Violation:
    rule: str
    state: str
    detail: str = ""

    def __str__(self):
        return f"{self.rule} at {self.state}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True, eq=False)
class ConcurrentGame:
    """Two-player concurrent game structure.

    ``delta[(s, a, b)]`` is the successor distribution when player 1 plays
    ``a`` and player 2 plays ``b`` at ``s``. Only positive entries are stored.
    An MDP is a concurrent game in which one player has a single move
    everywhere.
    """

    states: Tuple[str, ...]
    moves1: Mapping[str, Tuple[str, ...]]
    moves2: Mapping[str, Tuple[str, ...]]
    delta: Mapping[Tuple[str, str, str], Dist]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "moves1", {s: tuple(m) for s, m in self.moves1.items()})
        object.__setattr__(self, "moves2", {s: tuple(m) for s, m in self.moves2.items()})
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})

    def moves(self, player: int, s: str) -> Tuple[str, ...]:
        return self.moves1[s] if player == 1 else self.moves2[s]

    def transition(self, s: str, a: str, b: str) -> Dist:
        try:
            return self.delta[(s, a, b)]
        except KeyError:
            raise ValueError(f"no transition for ({s!r}, {a!r}, {b!r})") from None

    def is_absorbing(self, s: str) -> bool:
        return all(
            self.delta.get((s, a, b)) == {s: 1} for a in self.moves1[s] for b in self.moves2[s]
        )

    def mdp_player(self) -> Optional[int]:
        """The player who still has choices, if this game is an MDP.

        Returns 1 or 2, 2 for a Markov chain, and None when both players
        have choices somewhere.
        """
        if all(len(self.moves1[s]) == 1 for s in self.states):
            return 2
        if all(len(self.moves2[s]) == 1 for s in self.states):
            return 1
        return None


@dataclass(frozen=True, eq=False)
class TurnBasedGame:
    """Turn-based stochastic game graph.

    ``owner[s]`` is one of ``P1``, ``P2``, ``RANDOM``; ``edges[s]`` lists the
    successors in declaration order and ``delta[s]`` is the distribution at a
    random state.
    """

    states: Tuple[str, ...]
    owner: Mapping[str, str]
    edges: Mapping[str, Tuple[str, ...]]
    delta: Mapping[str, Dist] = field(default_factory=dict)
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "edges", {s: tuple(e) for s, e in self.edges.items()})
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})

    def states_of(self, owner: str) -> List[str]:
        return [s for s in self.states if self.owner[s] == owner]

    def to_concurrent(self) -> ConcurrentGame:
        """View as a concurrent game whose moves are successor ids.

        The player who does not own a state gets the single move ``NOOP``.
        """
        moves1, moves2, delta = {}, {}, {}
        for s in self.states:
            kind = self.owner[s]
            if kind == P1:
                moves1[s], moves2[s] = self.edges[s], (NOOP,)
                for t in self.edges[s]:
                    delta[(s, t, NOOP)] = point(t)
            elif kind == P2:
                moves1[s], moves2[s] = (NOOP,), self.edges[s]
                for t in self.edges[s]:
                    delta[(s, NOOP, t)] = point(t)
            else:
                moves1[s], moves2[s] = (NOOP,), (NOOP,)
                delta[(s, NOOP, NOOP)] = dict(self.delta[s])
        return ConcurrentGame(self.states, moves1, moves2, delta)


@dataclass(frozen=True, eq=False)
class Selector:
    """Memoryless strategy: one move distribution per state."""

    player: int
    dist: Mapping[str, Dist]

    def __getitem__(self, s: str) -> Dist:
        return self.dist[s]

    def __eq__(self, other):
        return (
            isinstance(other, Selector)
            and self.player == other.player
            and dict(self.dist) == dict(other.dist)
        )

    def support(self, s: str) -> List[str]:
        return [a for a, p in self.dist[s].items() if p > 0]

    @property
    def pure(self) -> bool:
        return all(len(d) == 1 for d in self.dist.values())

    def replace(self, updates: Mapping[str, Dist]) -> "Selector":
        dist = dict(self.dist)
        dist.update(updates)
        return Selector(self.player, dist)

    def check(self, game: ConcurrentGame) -> List[Violation]:
        out = []
        for s in game.states:
            if s not in self.dist:
                out.append(Violation("selector-missing", s))
                continue
            d = self.dist[s]
            allowed = set(game.moves(self.player, s))
            for a, p in d.items():
                if a not in allowed:
                    out.append(Violation("selector-move", s, f"{a!r} not available"))
                if p <= 0:
                    out.append(Violation("selector-nonpositive", s, f"{a!r}: {p}"))
            if sum(d.values()) != 1:
                out.append(Violation("selector-sum", s, str(sum(d.values()))))
        return out


def uniform_selector(game: ConcurrentGame, player: int = 1) -> Selector:
    dist = {}
    for s in game.states:
        moves = game.moves(player, s)
        dist[s] = {a: Fraction(1, len(moves)) for a in moves}
    return Selector(player, dist)


@dataclass(frozen=True)
class Objective:
    kind: str  # "safety" | "reachability"
    states: frozenset

    def __post_init__(self):
        if self.kind not in ("safety", "reachability"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        object.__setattr__(self, "states", frozenset(self.states))

    def safe_set(self, all_states: Iterable[str]) -> frozenset:
        if self.kind == "safety":
            return self.states
        return frozenset(all_states) - self.states

    def target(self, all_states: Iterable[str]) -> frozenset:
        if self.kind == "reachability":
            return self.states
        return frozenset(all_states) - self.states


def _check_dist(d: Mapping, where: str, known: set, out: list, detail: str = ""):
    for t, p in d.items():
        if t not in known:
            out.append(Violation("unknown-state", where, f"{detail} successor {t!r}".strip()))
        if not isinstance(p, Fraction) and not isinstance(p, int):
            out.append(Violation("non-rational", where, f"{detail} {t!r}: {p!r}".strip()))
        elif p <= 0:
            out.append(Violation("nonpositive-probability", where, f"{detail} {t!r}: {p}".strip()))
    total = sum(d.values())
    if total != 1:
        out.append(Violation("distribution-sum", where, f"{detail} sums to {total}".strip()))


def validate_game(game) -> List[Violation]:
    """Check the structural invariants of a game; empty list means valid."""
    out: List[Violation] = []
    known = set(game.states)
    if len(known) != len(game.states):
        out.append(Violation("duplicate-state", "*"))
    if isinstance(game, ConcurrentGame):
        for s in game.states:
            m1, m2 = game.moves1.get(s, ()), game.moves2.get(s, ())
            if not m1:
                out.append(Violation("empty-moves", s, "player 1"))
            if not m2:
                out.append(Violation("empty-moves", s, "player 2"))
            for a in m1:
                for b in m2:
                    d = game.delta.get((s, a, b))
                    if d is None:
                        out.append(Violation("missing-delta", s, f"({a}, {b})"))
                    else:
                        _check_dist(d, s, known, out, f"({a}, {b})")
        return out
    for s in game.states:
        kind = game.owner.get(s)
        succ = game.edges.get(s, ())
        if kind not in (P1, P2, RANDOM):
            out.append(Violation("bad-owner", s, repr(kind)))
        if not succ:
            out.append(Violation("no-outgoing-edge", s))
        for t in succ:
            if t not in known:
                out.append(Violation("unknown-state", s, f"edge to {t!r}"))
        if kind == RANDOM:
            d = game.delta.get(s)
            if d is None:
                out.append(Violation("missing-delta", s))
                continue
            _check_dist(d, s, known, out)
            if set(d) != set(succ):
                out.append(Violation("support-mismatch", s, "support differs from edges"))
    return out


def dest(game: ConcurrentGame, s: str, a: str, b: str) -> frozenset:
    if a not in game.moves1.get(s, ()) or b not in game.moves2.get(s, ()):
        raise ValueError(f"({a!r}, {b!r}) not available at {s!r}")
    return frozenset(t for t, p in game.delta[(s, a, b)].items() if p > 0)


def dest_selectors(game: ConcurrentGame, s: str, xi1: Selector, xi2: Selector) -> frozenset:
    out = set()
    for a in xi1.support(s):
        for b in xi2.support(s):
            out |= dest(game, s, a, b)
    return frozenset(out)


def mix(game: ConcurrentGame, s: str, xi: Mapping[str, Fraction], player: int, other: str) -> Dist:
    """Successor distribution at ``s`` when ``player`` mixes ``xi`` and the
    opponent plays ``other``."""
    out: Dist = {}
    for a, w in xi.items():
        if w == 0:
            continue
        key = (s, a, other) if player == 1 else (s, other, a)
        for t, p in game.delta[key].items():
            out[t] = out.get(t, 0) + w * p
    return {t: p for t, p in out.items() if p != 0}


def fix_selector(game: ConcurrentGame, xi: Selector) -> ConcurrentGame:
    """Fix ``xi`` for its player; the result is an MDP for the opponent."""
    bad = xi.check(game)
    if bad:
        raise ValueError("invalid selector: " + "; ".join(map(str, bad)))
    moves1, moves2, delta = {}, {}, {}
    for s in game.states:
        if xi.player == 1:
            moves1[s], moves2[s] = (NOOP,), game.moves2[s]
            for b in game.moves2[s]:
                delta[(s, NOOP, b)] = mix(game, s, xi[s], 1, b)
        else:
            moves1[s], moves2[s] = game.moves1[s], (NOOP,)
            for a in game.moves1[s]:
                delta[(s, a, NOOP)] = mix(game, s, xi[s], 2, a)
    return ConcurrentGame(game.states, moves1, moves2, delta)


def make_absorbing(game, states: Iterable[str]):
    """Replace every transition out of ``states`` by a self-loop."""
    states = set(states)
    if isinstance(game, TurnBasedGame):
        edges = {s: ((s,) if s in states else game.edges[s]) for s in game.states}
        owner = dict(game.owner)
        delta = {}
        for s in game.states:
            if s in states and owner[s] == RANDOM:
                delta[s] = point(s)
            elif owner[s] == RANDOM:
                delta[s] = game.delta[s]
        return TurnBasedGame(game.states, owner, edges, delta)
    delta = dict(game.delta)
    for s in states:
        for a in game.moves1[s]:
            for b in game.moves2[s]:
                delta[(s, a, b)] = point(s)
    return ConcurrentGame(game.states, game.moves1, game.moves2, delta)


def value_classes(v: Mapping[str, Fraction]) -> List[Tuple[Fraction, List[str]]]:
    """Group states by exact value, classes sorted by ascending value."""
    classes: Dict[Fraction, List[str]] = {}
    for s, r in v.items():
        classes.setdefault(r, []).append(s)
    return sorted(classes.items())


def valuation(states: Sequence[str], ones: Iterable[str] = ()) -> Dict[str, Fraction]:
    """Indicator valuation of ``ones``."""
    ones = set(ones)
    return {s: Fraction(int(s in ones)) for s in states}
