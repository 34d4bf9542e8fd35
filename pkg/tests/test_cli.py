import json

import pytest

from safegames.cli import EXIT_INVALID, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, main
from safegames.io import fixture_path, loads_game, read_trace


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _fixture(name):
    return str(fixture_path(name))


def test_validate(capsys):
    code, out, _ = _run(capsys, "validate", _fixture("mp-safety"))
    assert code == EXIT_OK and "concurrent game, 2 states" in out


def test_invalid_file_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"format_version": 1, "kind": "concurrent", "states": ["s"]}')
    code, _, err = _run(capsys, "validate", p)
    assert code == EXIT_INVALID and "missing-field" in err


def test_missing_file_is_usage_error(tmp_path, capsys):
    assert _run(capsys, "validate", tmp_path / "nope.json")[0] == EXIT_USAGE


def test_solve_safety_matching_pennies(capsys):
    code, out, _ = _run(capsys, "solve-safety", _fixture("mp-safety"))
    res = json.loads(out)
    assert code == EXIT_OK
    assert res["values"]["s"]["exact"] == "0"
    assert res["metadata"]["stopReason"] == "ExactTermination"


def test_solve_safety_trace_and_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        o, t = tmp_path / f"r{k}.json", tmp_path / f"t{k}.ndjson"
        code, _, _ = _run(capsys, "solve-safety", _fixture("irrational"), "--max-iters", 20,
                          "--epsilon", "1/1000", "--precision", 30, "--trace", t, "-o", o)
        assert code == EXIT_OK
        outs.append((o.read_bytes(), t.read_bytes()))
    assert outs[0] == outs[1]
    kinds = {r["kind"] for r in read_trace(tmp_path / "t0.ndjson")}
    assert kinds == {"PreStep", "UpperVI"}


def test_anytime(tmp_path, capsys):
    t = tmp_path / "t.ndjson"
    code, out, _ = _run(capsys, "anytime", _fixture("irrational"), "--epsilon", "1/10000", "--trace", t)
    res = json.loads(out)
    assert code == EXIT_OK and res["metadata"]["stopReason"] == "EpsilonGap"
    from fractions import Fraction
    assert Fraction(res["metadata"]["gap"]) <= Fraction(1, 10000)
    kinds = [r["kind"] for r in read_trace(t)]
    assert "UpperVI" in kinds and "PreStep" in kinds


def test_anytime_requires_epsilon(capsys):
    with pytest.raises(SystemExit):
        main(["anytime", _fixture("irrational")])


def test_solve_reach_turn_based(capsys):
    code, out, _ = _run(capsys, "solve-reach", _fixture("binary-reach"))
    res = json.loads(out)
    assert code == EXIT_OK and res["metadata"]["bounds"] == {"stepBound": 96, "strategyBound": 4}
    assert res["metadata"]["iterations"] <= 4


def test_solve_reach_wrong_objective(capsys):
    code, _, err = _run(capsys, "solve-reach", _fixture("mp-safety"))
    assert code == EXIT_USAGE and "reachability" in err


def test_solve_reach_concurrent(tmp_path, capsys):
    p = tmp_path / "mp.json"
    data = json.loads(open(_fixture("mp-safety")).read())
    data["objective"] = {"reachability": ["bad"]}
    p.write_text(json.dumps(data))
    code, out, _ = _run(capsys, "solve-reach", p, "--rounds", 3)
    assert code == EXIT_OK and json.loads(out)["values"]["s"]["exact"] == "7/8"
    code, out, _ = _run(capsys, "solve-reach", p, "--epsilon", "1/100")
    res = json.loads(out)
    assert code == EXIT_OK and res["values"]["s"]["exact"] == "1"


def test_bounds(capsys):
    code, out, _ = _run(capsys, "bounds", _fixture("binary-reach"))
    res = json.loads(out)
    assert (res["stepBound"], res["strategyBound"], res["bound"]) == (96, 4, 4)


def test_bounds_needs_turn_based(capsys):
    assert _run(capsys, "bounds", _fixture("mp-safety"))[0] == EXIT_USAGE


def test_to_binary(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert _run(capsys, "to-binary", _fixture("pre-stall"), "-o", out)[0] == EXIT_OK
    game, obj = loads_game(out.read_text())
    aux = [s for s in game.states if "~b" in s]
    assert aux and all(len(game.delta[s]) == 2 for s in aux)
    # aux states below a safe random state stay safe
    assert all(s in obj.states for s in aux if s.startswith("s2") or s.startswith("s3"))


def test_reduce(tmp_path, capsys):
    res = tmp_path / "r.json"
    _run(capsys, "solve-safety", _fixture("mp-safety"), "-o", res)
    out = tmp_path / "red.json"
    assert _run(capsys, "reduce", _fixture("mp-safety"), "--valuation", res, "-o", out)[0] == EXIT_OK
    game, obj = loads_game(out.read_text())
    assert "s" in game.states and obj.kind == "safety"


def test_reduce_bad_valuation(tmp_path, capsys):
    v = tmp_path / "v.json"
    v.write_text(json.dumps({"s": "3/2", "bad": "0"}))
    code, _, _ = _run(capsys, "reduce", _fixture("mp-safety"), "--valuation", v, "-o", tmp_path / "o.json")
    assert code == EXIT_USAGE


def test_resource_limit_exit(monkeypatch, capsys):
    monkeypatch.setenv("SAFEGAMES_SUBSET_CAP", "1")
    code, _, err = _run(capsys, "solve-safety", _fixture("pre-stall"))
    assert code == EXIT_RESOURCE and "resource limit" in err
