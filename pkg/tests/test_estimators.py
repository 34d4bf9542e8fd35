from fractions import Fraction as F

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from games import mp_safety
from safegames import (
    AnytimeSafetySolver,
    ReachValueIteration,
    SafetyStrategyImprovement,
    TurnBasedReachability,
)
from safegames.io import load_fixture


def test_get_set_params_and_clone():
    est = SafetyStrategyImprovement(max_iter=7)
    assert est.get_params()["max_iter"] == 7
    est.set_params(max_iter=3)
    assert clone(est).max_iter == 3


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        AnytimeSafetySolver().predict()


def test_safety_fit_predict():
    game, obj = load_fixture("pre-stall")
    est = SafetyStrategyImprovement().fit(game, obj.states)
    assert est.predict(["s0", "s1"]) == [F(2, 3), F(2, 3)]
    assert est.n_iter_ == 2
    with pytest.raises(KeyError):
        est.predict(["nope"])


def test_anytime_fit():
    game, obj = load_fixture("irrational")
    est = AnytimeSafetySolver(epsilon="1/1000").fit(game, obj.states)
    lo, hi = est.predict(["s"])[0], est.upper_[("s")]
    assert 0 <= hi - lo <= F(1, 1000)


def test_turn_based_reachability():
    game, obj = load_fixture("binary-reach")
    est = TurnBasedReachability().fit(game, obj.states)
    assert est.predict(["goal"]) == [1]


def test_reach_value_iteration():
    g = mp_safety()
    est = ReachValueIteration(rounds=3, player=2).fit(g, {"bad"})
    assert est.predict(["s"]) == [F(7, 8)]


def test_bad_inputs_rejected():
    with pytest.raises(TypeError):
        SafetyStrategyImprovement().fit("not a game", {"s"})
    with pytest.raises(ValueError):
        SafetyStrategyImprovement().fit(mp_safety(), {"zz"})
    with pytest.raises(TypeError):
        AnytimeSafetySolver(epsilon=0.01).fit(mp_safety(), {"s"})
