"""JSON game files, result files and NDJSON traces.

Probabilities and values are written as strings ``"p/q"`` (plain integers
allowed) so they survive the round trip exactly. Every parse problem is
reported as a :class:`Diagnostic` with a stable code and a dotted field
path.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exceptions import InvalidGameError
from .model import P1, P2, RANDOM, ConcurrentGame, Objective, Selector, TurnBasedGame, validate_game

__all__ = [
    "FORMAT_VERSION",
    "Diagnostic",
    "GameFileError",
    "TraceError",
    "parse_rational",
    "format_rational",
    "format_decimal",
    "game_from_dict",
    "game_to_dict",
    "load_game",
    "loads_game",
    "dump_game",
    "result_dict",
    "valuation_to_json",
    "valuation_from_json",
    "trace_records",
    "check_trace",
    "write_trace",
    "read_trace",
    "fixture_path",
    "load_fixture",
]

FORMAT_VERSION = 1
_RATIONAL = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    path: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.path}: {self.message}"


class GameFileError(InvalidGameError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__(self.diagnostics, "\n".join(map(str, self.diagnostics)))


class TraceError(ValueError):
    """A trace failed its ordering checks and was not written."""


# --------------------------------------------------------------------------
# rationals


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ValueError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        m = _RATIONAL.match(x)
        if m and m.group(2) != "0":
            return Fraction(int(m.group(1)), int(m.group(2) or 1))
    raise ValueError(f"not a rational 'p/q': {x!r}")


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def format_decimal(x: Fraction, digits: int = 12) -> str:
    """Round half to even at ``digits`` fractional digits."""
    x = Fraction(x)
    n = round(x * 10 ** digits)
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10 ** digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


# --------------------------------------------------------------------------
# game files


class _Collector:
    def __init__(self):
        self.out: List[Diagnostic] = []

    def add(self, code, path, message):
        self.out.append(Diagnostic(code, path, message))

    def field(self, obj, key, kind, path):
        if not isinstance(obj, dict) or key not in obj:
            self.add("missing-field", f"{path}.{key}".lstrip("."), "required field is missing")
            return None
        val = obj[key]
        if not isinstance(val, kind):
            self.add("bad-type", f"{path}.{key}".lstrip("."),
                     f"expected {kind.__name__ if isinstance(kind, type) else 'value'}, got {type(val).__name__}")
            return None
        return val

    def rational(self, x, path):
        try:
            return parse_rational(x)
        except ValueError:
            self.add("malformed-rational", path, f"{x!r} is not an exact rational 'p/q'")
            return None

    def dist(self, obj, path, known):
        if not isinstance(obj, dict) or not obj:
            self.add("bad-type", path, "expected a non-empty object {state: probability}")
            return None
        d, ok = {}, True
        for t, p in obj.items():
            if t not in known:
                self.add("unknown-state", f"{path}.{t}", f"successor {t!r} is not a declared state")
                ok = False
            r = self.rational(p, f"{path}.{t}")
            if r is None:
                ok = False
            elif r <= 0:
                self.add("nonpositive-probability", f"{path}.{t}", f"probability {r} must be positive")
                ok = False
            else:
                d[t] = r
        if ok and sum(d.values()) != 1:
            self.add("distribution-sum", path, f"probabilities sum to {sum(d.values())}, not 1")
            ok = False
        return d if ok else None


def _state_list(c: _Collector, data) -> Tuple[str, ...]:
    states = c.field(data, "states", list, "")
    if states is None:
        return ()
    seen = set()
    for i, s in enumerate(states):
        if not isinstance(s, str) or not s:
            c.add("bad-type", f"states[{i}]", "state ids must be non-empty strings")
        elif s in seen:
            c.add("duplicate-state", f"states[{i}]", f"state {s!r} declared twice")
        seen.add(s)
    return tuple(s for s in states if isinstance(s, str))


def _objective(c: _Collector, data, known) -> Optional[Objective]:
    obj = c.field(data, "objective", dict, "")
    if obj is None:
        return None
    kinds = [k for k in ("safety", "reachability") if k in obj]
    if len(kinds) != 1 or len(obj) != 1:
        c.add("bad-objective", "objective", "expected exactly one of 'safety' or 'reachability'")
        return None
    kind = kinds[0]
    states = obj[kind]
    if not isinstance(states, list):
        c.add("bad-type", f"objective.{kind}", "expected a list of state ids")
        return None
    for i, s in enumerate(states):
        if s not in known:
            c.add("unknown-state", f"objective.{kind}[{i}]", f"{s!r} is not a declared state")
    return Objective(kind, frozenset(s for s in states if s in known))


def _concurrent(c: _Collector, data, states):
    known = set(states)
    moves = {}
    for key in ("moves1", "moves2"):
        m = c.field(data, key, dict, "")
        moves[key] = {}
        if m is None:
            continue
        for s in states:
            lst = m.get(s)
            if not isinstance(lst, list) or not lst:
                c.add("empty-moves", f"{key}.{s}", "each state needs a non-empty move list")
                continue
            if len(set(lst)) != len(lst) or not all(isinstance(a, str) for a in lst):
                c.add("bad-type", f"{key}.{s}", "moves must be distinct strings")
                continue
            moves[key][s] = tuple(lst)
        for s in m:
            if s not in known:
                c.add("unknown-state", f"{key}.{s}", f"{s!r} is not a declared state")
    trans = c.field(data, "transitions", dict, "")
    delta = {}
    if trans is not None:
        for s in states:
            if s not in moves["moves1"] or s not in moves["moves2"]:
                continue
            row = trans.get(s, {})
            for a in moves["moves1"][s]:
                for b in moves["moves2"][s]:
                    path = f"transitions.{s}.{a}.{b}"
                    cell = row.get(a, {}).get(b) if isinstance(row.get(a), dict) else None
                    if cell is None:
                        c.add("missing-delta", path, f"no distribution for state {s!r}, moves ({a}, {b})")
                        continue
                    d = c.dist(cell, path, known)
                    if d is not None:
                        delta[(s, a, b)] = d
        for s in trans:
            if s not in known:
                c.add("unknown-state", f"transitions.{s}", f"{s!r} is not a declared state")
    if c.out:
        return None
    return ConcurrentGame(states, moves["moves1"], moves["moves2"], delta)


def _turn_based(c: _Collector, data, states):
    known = set(states)
    owners = c.field(data, "owners", dict, "")
    edges_in = c.field(data, "edges", dict, "")
    probs = data.get("probabilities", {}) if isinstance(data, dict) else {}
    if not isinstance(probs, dict):
        c.add("bad-type", "probabilities", "expected an object")
        probs = {}
    owner, edges, delta = {}, {}, {}
    for s in states:
        o = owners.get(s) if owners is not None else None
        if o not in (P1, P2, RANDOM):
            if owners is not None:
                c.add("bad-owner", f"owners.{s}", f"owner must be one of P1, P2, R; got {o!r}")
            continue
        owner[s] = o
        e = edges_in.get(s) if edges_in is not None else None
        if not isinstance(e, list) or not e:
            if edges_in is not None:
                c.add("no-outgoing-edge", f"edges.{s}", "each state needs at least one edge")
            continue
        bad = [t for t in e if t not in known]
        for t in bad:
            c.add("unknown-state", f"edges.{s}", f"edge to undeclared state {t!r}")
        if len(set(e)) != len(e):
            c.add("bad-type", f"edges.{s}", "duplicate successor")
        edges[s] = tuple(e)
        if o == RANDOM:
            if s not in probs:
                c.add("missing-delta", f"probabilities.{s}", f"random state {s!r} has no distribution")
                continue
            d = c.dist(probs[s], f"probabilities.{s}", known)
            if d is None:
                continue
            if set(d) != set(e):
                c.add("support-mismatch", f"probabilities.{s}",
                      f"support {sorted(d)} differs from edges {sorted(e)}")
                continue
            delta[s] = d
    for s in probs:
        if owner.get(s) != RANDOM and s in known and s in owner:
            c.add("support-mismatch", f"probabilities.{s}", f"{s!r} is not a random state")
    if c.out:
        return None
    return TurnBasedGame(states, owner, edges, delta)


def game_from_dict(data) -> Tuple[object, Optional[Objective]]:
    c = _Collector()
    if not isinstance(data, dict):
        raise GameFileError([Diagnostic("bad-type", "", "top level must be an object")])
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        c.add("bad-version", "format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    kind = data.get("kind")
    states = _state_list(c, data)
    if kind == "concurrent":
        game = _concurrent(c, data, states)
    elif kind == "turn-based":
        game = _turn_based(c, data, states)
    else:
        c.add("bad-kind", "kind", f"expected 'concurrent' or 'turn-based', got {kind!r}")
        game = None
    objective = _objective(c, data, set(states)) if "objective" in data else None
    if c.out:
        raise GameFileError(c.out)
    rest = validate_game(game)
    if rest:
        raise GameFileError([Diagnostic(v.rule, v.state, v.detail or v.rule) for v in rest])
    return game, objective


def loads_game(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFileError([Diagnostic("json-syntax", f"line {exc.lineno} column {exc.colno}", exc.msg)])
    return game_from_dict(data)


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return loads_game(fh.read())


def _dist_json(d: Mapping[str, Fraction]) -> Dict[str, str]:
    return {t: format_rational(p) for t, p in d.items()}


def game_to_dict(game, objective: Optional[Objective] = None) -> dict:
    out = {"format_version": FORMAT_VERSION}
    if isinstance(game, ConcurrentGame):
        out["kind"] = "concurrent"
        out["states"] = list(game.states)
        out["moves1"] = {s: list(game.moves1[s]) for s in game.states}
        out["moves2"] = {s: list(game.moves2[s]) for s in game.states}
        out["transitions"] = {
            s: {a: {b: _dist_json(game.delta[(s, a, b)]) for b in game.moves2[s]} for a in game.moves1[s]}
            for s in game.states
        }
    else:
        out["kind"] = "turn-based"
        out["states"] = list(game.states)
        out["owners"] = {s: game.owner[s] for s in game.states}
        out["edges"] = {s: list(game.edges[s]) for s in game.states}
        out["probabilities"] = {s: _dist_json(game.delta[s]) for s in game.states if game.owner[s] == RANDOM}
    if objective is not None:
        out["objective"] = {objective.kind: [s for s in game.states if s in objective.states]}
    return out


def dump_game(game, objective: Optional[Objective] = None) -> str:
    return json.dumps(game_to_dict(game, objective), indent=2) + "\n"


# --------------------------------------------------------------------------
# results and traces


def valuation_to_json(v: Mapping[str, Fraction], digits: Optional[int] = None) -> dict:
    if digits is None:
        return {s: format_rational(x) for s, x in v.items()}
    return {s: {"exact": format_rational(x), "decimal": format_decimal(x, digits)} for s, x in v.items()}


def valuation_from_json(obj: Mapping[str, object]) -> Dict[str, Fraction]:
    out = {}
    for s, x in obj.items():
        if isinstance(x, dict):
            x = x.get("exact")
        out[s] = parse_rational(x)
    return out


def result_dict(command: str, values: Mapping[str, Fraction], *, digits: int = 12,
                strategy: Optional[Selector] = None, metadata: Optional[dict] = None,
                upper: Optional[Mapping[str, Fraction]] = None) -> dict:
    out = {"format_version": FORMAT_VERSION, "command": command,
           "values": valuation_to_json(values, digits)}
    if upper is not None:
        out["upper"] = valuation_to_json(upper, digits)
    if strategy is not None:
        out["strategy"] = {s: _dist_json(d) for s, d in strategy.dist.items()}
    out["metadata"] = dict(metadata or {})
    return out


def trace_records(records: Iterable = (), upper: Sequence[Mapping[str, Fraction]] = ()) -> List[dict]:
    """NDJSON-ready dicts: one per improvement record, then one per upper
    iterate (kind ``UpperVI``)."""
    out = []
    for r in records:
        out.append({"index": r.index, "kind": r.kind,
                    "improved": [s for s in r.valuation if s in r.improved],
                    "valuation": valuation_to_json(r.valuation)})
    for j, u in enumerate(upper):
        out.append({"index": j, "kind": "UpperVI", "improved": [], "valuation": valuation_to_json(u)})
    return out


def check_trace(lines: Sequence[dict]) -> None:
    """Lower valuations must not decrease, upper ones must not increase, and
    the last lower must sit below the last upper."""
    lower = [valuation_from_json(r["valuation"]) for r in lines if r["kind"] != "UpperVI"]
    upper = [valuation_from_json(r["valuation"]) for r in lines if r["kind"] == "UpperVI"]
    for seq, sign, name in ((lower, 1, "lower"), (upper, -1, "upper")):
        for i in range(1, len(seq)):
            for s, x in seq[i].items():
                if sign * (x - seq[i - 1][s]) < 0:
                    raise TraceError(f"{name} trace not monotone at index {i}, state {s!r}")
    if lower and upper:
        for s, x in lower[-1].items():
            if x > upper[-1][s]:
                raise TraceError(f"lower bound exceeds upper bound at state {s!r}")


def write_trace(path, lines: Sequence[dict]) -> None:
    check_trace(lines)
    with open(path, "w", encoding="utf-8") as fh:
        for r in lines:
            fh.write(json.dumps(r) + "\n")


def read_trace(path) -> List[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def fixture_path(name: str):
    """Path of a shipped example game, e.g. ``fixture_path("mp-safety")``."""
    path = resources.files("safegames") / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no shipped fixture named {name!r}")
    return path


def load_fixture(name: str):
    return loads_game(fixture_path(name).read_text(encoding="utf-8"))
