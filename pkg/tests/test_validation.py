from fractions import Fraction as F

import pytest

from games import mp_safety
from safegames.exceptions import InvalidGameError
from safegames.model import ConcurrentGame, Selector, uniform_selector
from safegames.validation import check_game, check_rational, check_selector, check_states, check_valuation


def test_check_game():
    g = mp_safety()
    assert check_game(g) is g
    with pytest.raises(TypeError):
        check_game({"states": []})
    broken = ConcurrentGame(["s"], {"s": ("a",)}, {"s": ("b",)}, {("s", "a", "b"): {"s": F(1, 2)}})
    with pytest.raises(InvalidGameError):
        check_game(broken)


def test_check_states():
    assert check_states(mp_safety(), ["s"]) == {"s"}
    with pytest.raises(ValueError):
        check_states(mp_safety(), ["x"])


def test_check_rational():
    assert check_rational("1/3") == F(1, 3)
    assert check_rational(2) == 2
    for bad in (0.5, True):
        with pytest.raises(TypeError):
            check_rational(bad)
    with pytest.raises(ValueError):
        check_rational(0, positive=True)


def test_check_valuation():
    g = mp_safety()
    assert check_valuation(g, {"s": "1/2", "bad": 0}) == {"s": F(1, 2), "bad": 0}
    with pytest.raises(ValueError):
        check_valuation(g, {"s": F(3, 2), "bad": 0})
    with pytest.raises(ValueError):
        check_valuation(g, {"s": F(1, 2)})


def test_check_selector():
    g = mp_safety()
    sel = uniform_selector(g)
    assert check_selector(g, sel) is sel
    with pytest.raises(ValueError):
        check_selector(g, Selector(1, {"s": {"a": F(1)}}))
