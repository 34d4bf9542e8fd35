import random
from fractions import Fraction as F

import pytest

from games import HALF, NOOP, P1, P2, RANDOM, chain, matching_pennies, tb
from oracles import random_concurrent, random_turn_based
from safegames.model import (
    ConcurrentGame,
    Objective,
    Selector,
    dest,
    dest_selectors,
    fix_selector,
    make_absorbing,
    uniform_selector,
    validate_game,
    value_classes,
)


def _rules(game):
    return [v.rule for v in validate_game(game)]


def test_single_absorbing_state_is_valid():
    assert validate_game(chain(("s", {"s": F(1)}))) == []


def test_short_distribution_flagged():
    g = chain(("s", {"s": F(3, 4)}))
    assert _rules(g) == ["distribution-sum"]


def test_turn_based_state_without_edges_flagged():
    g = tb({"s": P1}, {"s": ()})
    assert "no-outgoing-edge" in _rules(g)


def test_missing_delta_and_unknown_successor():
    g = ConcurrentGame(["s"], {"s": ("a", "b")}, {"s": ("c",)}, {("s", "a", "c"): {"x": F(1)}})
    rules = _rules(g)
    assert "missing-delta" in rules and "unknown-state" in rules


def test_float_probability_is_not_rational():
    g = chain(("s", {"s": 1.0}))
    assert "non-rational" in _rules(g)


def test_random_support_must_match_edges():
    g = tb({"r": RANDOM, "t": P1}, {"r": ("t",), "t": ("t",)}, {"r": {"r": HALF, "t": HALF}})
    assert "support-mismatch" in _rules(g)


def test_dest():
    g = chain(("s", {"t": HALF, "u": HALF}), ("t", {"t": F(1)}), ("u", {"u": F(1)}))
    assert dest(g, "s", NOOP, NOOP) == {"t", "u"}
    assert dest(g, "t", NOOP, NOOP) == {"t"}
    with pytest.raises(ValueError):
        dest(g, "s", "zz", NOOP)


def test_dest_selectors_unions_supports():
    g = matching_pennies()
    h = Selector(1, {"s": {"h": HALF, "t": HALF}, "win": {NOOP: F(1)}, "lose": {NOOP: F(1)}})
    pure_h = Selector(1, {"s": {"h": F(1)}, "win": {NOOP: F(1)}, "lose": {NOOP: F(1)}})
    col = Selector(2, {"s": {"H": F(1)}, "win": {NOOP: F(1)}, "lose": {NOOP: F(1)}})
    assert dest_selectors(g, "s", pure_h, col) == dest(g, "s", "h", "H")
    assert dest_selectors(g, "s", h, col) == {"win", "lose"}
    assert dest_selectors(g, "s", h, uniform_selector(g, 2)) == {"win", "lose"}


def test_fix_selector_mixes_rows():
    g = matching_pennies()
    mdp = fix_selector(g, uniform_selector(g, 1))
    assert mdp.delta[("s", NOOP, "H")] == {"win": HALF, "lose": HALF}
    assert mdp.mdp_player() == 2


def test_fixing_both_sides_gives_a_chain():
    g = matching_pennies()
    mc = fix_selector(fix_selector(g, uniform_selector(g, 1)), uniform_selector(fix_selector(g, uniform_selector(g, 1)), 2))
    assert all(len(mc.moves1[s]) == 1 and len(mc.moves2[s]) == 1 for s in mc.states)


def test_fix_selector_rejects_bad_selector():
    g = matching_pennies()
    bad = Selector(1, {"s": {"h": F(1, 3)}, "win": {NOOP: F(1)}, "lose": {NOOP: F(1)}})
    with pytest.raises(ValueError):
        fix_selector(g, bad)


def test_make_absorbing():
    g = chain(("s", {"t": F(1)}), ("t", {"t": F(1)}))
    out = make_absorbing(g, {"s"})
    assert out.delta[("s", NOOP, NOOP)] == {"s": F(1)}
    assert out.delta[("t", NOOP, NOOP)] == {"t": F(1)}
    assert make_absorbing(g, set()).delta == g.delta
    assert make_absorbing(out, {"s"}).delta == out.delta


def test_value_classes():
    assert value_classes({"s": F(1, 3), "t": F(1, 3)}) == [(F(1, 3), ["s", "t"])]
    assert value_classes({"s": F(1, 3), "t": F(2, 3), "u": F(1, 3)}) == [
        (F(1, 3), ["s", "u"]), (F(2, 3), ["t"])]
    assert [r for r, _ in value_classes({"s": F(0), "t": F(1)})] == [0, 1]


def test_objective_sets():
    obj = Objective("reachability", {"t"})
    assert obj.safe_set(["s", "t"]) == {"s"}
    with pytest.raises(ValueError):
        Objective("buchi", set())


@pytest.mark.parametrize("seed", range(15))
def test_to_concurrent_keeps_validity(seed):
    g = random_turn_based(random.Random(seed))
    c = g.to_concurrent()
    assert validate_game(c) == []
    for s in g.states_of(P2):
        assert len(c.moves1[s]) == 1 and len(c.moves2[s]) == len(g.edges[s])


@pytest.mark.parametrize("seed", range(15))
def test_uniform_selector_is_valid(seed):
    g = random_concurrent(random.Random(seed))
    assert uniform_selector(g, 1).check(g) == [] and uniform_selector(g, 2).check(g) == []
