import random
from fractions import Fraction as F

import pytest

from games import HALF, NOOP, chain, dominant_row, mp_safety
from oracles import brute_force_turn_based, random_concurrent, random_turn_based
from safegames.bounds import anytime_solve
from safegames.exceptions import ResourceLimitError
from safegames.improve import (
    EXACT_TERMINATION,
    ITERATION_CAP,
    PRE_STEP,
    TB_STEP,
    TERMINAL,
    enumerate_k_uniform,
    improvement_step,
    initial_selector,
    k_uniform_turn_based,
    prepare,
    round_selector,
    solve_safety,
)
from safegames.io import load_fixture
from safegames.matrix import pre1
from safegames.mdp import safety_value_under
from safegames.model import ConcurrentGame, Selector


def _three_moves():
    moves = ("a", "b", "c")
    delta = {("s", m, NOOP): {"s": F(1)} for m in moves}
    return ConcurrentGame(["s"], {"s": moves}, {"s": (NOOP,)}, delta)


def test_initial_selector_is_uniform():
    g = _three_moves()
    assert initial_selector(g)["s"] == {m: F(1, 3) for m in "abc"}
    assert initial_selector(mp_safety())["s"] == {"a": HALF, "b": HALF}
    assert initial_selector(mp_safety())["bad"] == {NOOP: 1}


def test_everything_safe_terminates_immediately():
    g = mp_safety()
    rep = solve_safety(g, g.states)
    assert rep.stop_reason == EXACT_TERMINATION and rep.n_iter == 1
    assert set(rep.final_valuation.values()) == {1}


def test_matching_pennies_terminal_at_zero():
    rep = solve_safety(mp_safety(), {"s"})
    assert rep.w1 == set()
    assert [r.kind for r in rep.records] == [TERMINAL]
    assert rep.final_valuation["s"] == 0


def test_dominant_row_ends_in_w1():
    g = dominant_row()
    rep = solve_safety(g, {"s", "r"})
    assert rep.w1 == {"s"}
    assert rep.final_valuation == {"s": 1, "r": HALF, "bad": 0}
    assert rep.final_selector["s"] == {"a": 1}


def test_single_improvable_state_prestep():
    # a: fair coin into good or bad; b: straight to bad
    g = ConcurrentGame(
        ["s", "good", "bad"], {"s": ("a", "b"), "good": (NOOP,), "bad": (NOOP,)},
        {"s": (NOOP,), "good": (NOOP,), "bad": (NOOP,)},
        {("s", "a", NOOP): {"good": HALF, "bad": HALF}, ("s", "b", NOOP): {"bad": F(1)},
         ("good", NOOP, NOOP): {"good": F(1)}, ("bad", NOOP, NOOP): {"bad": F(1)}})
    safe = {"s", "good"}
    pg, w1, _ = prepare(g, safe)
    gamma = initial_selector(pg)
    v = safety_value_under(pg, gamma, safe)
    assert v["s"] == F(1, 4) and pre1(pg, "s", v) == HALF
    step = improvement_step(pg, safe, w1, gamma, v)
    assert step.kind == PRE_STEP and step.improved == {"s"}
    assert step.selector["s"] == {"a": 1}
    rep = solve_safety(g, safe)
    assert [r.kind for r in rep.records] == [PRE_STEP, TERMINAL]
    assert rep.final_valuation["s"] == HALF


def test_stale_valuation_rejected():
    g = dominant_row()
    pg, w1, _ = prepare(g, {"s", "r"})
    gamma = initial_selector(pg)
    with pytest.raises(ValueError, match="stale"):
        improvement_step(pg, {"s", "r"}, w1, gamma, {s: F(0) for s in g.states})


def test_unprepared_game_rejected():
    g = dominant_row()
    with pytest.raises(ValueError, match="absorbing"):
        improvement_step(g, {"s", "r"}, {"s"}, initial_selector(g), {"s": 1, "r": HALF, "bad": 0})


def test_pre_stall_needs_the_tb_step():
    game, obj = load_fixture("pre-stall")
    safe = obj.states
    conc = game.to_concurrent()
    pg, w1, _ = prepare(conc, safe)
    gamma = initial_selector(pg)
    v = safety_value_under(pg, gamma, safe)
    step = improvement_step(pg, safe, w1, gamma, v)
    assert step.kind == TB_STEP and "s0" in step.improved
    assert all(pre1(pg, s, v) <= v[s] for s in pg.states)  # nothing for a PreStep
    rep = solve_safety(game, safe)
    assert [r.kind for r in rep.records] == [TB_STEP, TERMINAL]
    assert rep.final_valuation["s0"] > v["s0"]
    oracle = brute_force_turn_based(game, set(game.states) - safe, objective="safe")
    assert rep.final_valuation == oracle


@pytest.mark.parametrize("seed", range(40))
def test_turn_based_games_solve_exactly(seed):
    g = random_turn_based(random.Random(seed))
    safe = set(g.states) - {"bad"}
    rep = solve_safety(g, safe)
    assert rep.terminated
    assert rep.final_valuation == brute_force_turn_based(g, {"bad"}, objective="safe")
    # the returned selector secures the value
    assert safety_value_under(g.to_concurrent(), rep.final_selector, safe) == rep.final_valuation


@pytest.mark.parametrize("seed", range(20))
def test_terminal_valuation_is_a_fixpoint(seed):
    g = random_concurrent(random.Random(600 + seed))
    safe = set(g.states) - {"bad"}
    rep = solve_safety(g, safe, max_iter=40)
    if not rep.terminated:
        pytest.skip("no exact termination within the cap")
    v = rep.final_valuation
    pg, w1, _ = prepare(g, safe)
    for s in g.states:
        if s in w1:
            assert v[s] == 1
        elif s not in safe:
            assert v[s] == 0
        else:
            assert pre1(g, s, v) == v[s]


def test_round_selector():
    xi = {"a": F(1, 3), "b": F(2, 3)}
    r = round_selector(xi, 4)
    assert r == {"a": F(5, 16), "b": F(11, 16)}
    assert round_selector({"a": F(1)}, 4) == {"a": 1}
    assert round_selector({"a": F(1, 64), "b": F(63, 64)}, 2) == {"b": 1}


def test_enumerate_k_uniform():
    g = mp_safety()
    assert enumerate_k_uniform(g, "s", 1) == [{"a": 1}, {"b": 1}]
    assert enumerate_k_uniform(g, "s", 2) == [{"a": 1}, {"a": HALF, "b": HALF}, {"b": 1}]
    three = enumerate_k_uniform(g, "s", 3)
    assert {"a": F(1, 3), "b": F(2, 3)} in three and {"a": F(2, 3), "b": F(1, 3)} in three
    assert len(three) == 5
    with pytest.raises(ValueError):
        enumerate_k_uniform(g, "s", 0)


def test_k_uniform_matching_pennies_value_zero():
    g = mp_safety()
    tb, safe = k_uniform_turn_based(g, {"s"}, 2)
    assert len(tb.edges["s"]) == 3
    rep = solve_safety(tb, safe)
    assert rep.final_valuation["s"] == 0


def test_k_uniform_one_is_the_pure_expansion():
    g = dominant_row()
    tb, safe = k_uniform_turn_based(g, {"s", "r"}, 1)
    assert len(tb.edges["s"]) == 2
    assert solve_safety(tb, safe).final_valuation["s"] == solve_safety(g, {"s", "r"}).final_valuation["s"]


def test_k_uniform_budget(monkeypatch):
    monkeypatch.setenv("SAFEGAMES_KUNIFORM_BUDGET", "3")
    with pytest.raises(ResourceLimitError):
        k_uniform_turn_based(mp_safety(), {"s"}, 3)


def test_iteration_cap_reported():
    game, obj = load_fixture("irrational")
    rep = solve_safety(game, obj.states, max_iter=5)
    assert rep.stop_reason == ITERATION_CAP and rep.n_iter == 5 and not rep.terminated


def _plateau_game():
    # denser variant of the random generator (up to three successors)
    rng = random.Random(4058)
    return random_concurrent(rng, n_states=rng.randint(2, 5), max_succ=3)


def test_lower_bounds_can_stall_below_the_value():
    """Pre-steps keep improving q0 and q2 by ever smaller amounts, so the
    turn-based step that would lift q1 never runs and q1 stays at 1/3."""
    g = _plateau_game()
    safe = set(g.states) - {"bad"}
    rep = anytime_solve(g, safe, F(1, 10000), max_iter=40)
    assert rep.stop_reason == ITERATION_CAP
    assert all(v["q1"] == F(1, 3) for v in rep.lower)
    assert all(r.kind == PRE_STEP for r in rep.solve.records)
    assert rep.gap > F(1, 3)
    # a fixed selector found by grid search secures 22/31 at q1
    witness = Selector(1, {"q0": {"b": F(1)}, "q1": {"b": F(1)}, "q2": {"a": F(11, 20), "b": F(9, 20)},
                           "q3": {"b": F(1)}, "bad": {NOOP: F(1)}})
    assert safety_value_under(g, witness, safe)["q1"] == F(22, 31)
