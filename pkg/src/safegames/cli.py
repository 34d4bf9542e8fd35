"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O problem, 2 invalid game file,
3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import (
    anytime_solve,
    binary_transform_with_origin,
    swap_players,
    tb_reach_strategy_improvement,
    termination_bound,
)
from .exceptions import InvalidGameError, ResourceLimitError
from .improve import solve_safety
from .io import (
    TraceError,
    dump_game,
    format_rational,
    load_game,
    parse_rational,
    result_dict,
    trace_records,
    valuation_from_json,
    write_trace,
)
from .model import Objective, TurnBasedGame
from .reduction import tb_reduce
from .validation import check_valuation
from .valueiter import value_iteration_reach

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text):
    try:
        r = parse_rational(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a rational p/q, got {text!r}")
    if r <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return r


def _emit(args, payload: dict):
    text = json.dumps(payload, indent=2) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _objective(game, objective, want):
    if objective is None:
        raise UsageError("game file has no objective")
    if objective.kind != want:
        raise UsageError(f"this command needs a {want} objective, file has {objective.kind}")
    return objective.states


def cmd_validate(args):
    game, objective = load_game(args.file)
    kind = "turn-based" if isinstance(game, TurnBasedGame) else "concurrent"
    obj = "none" if objective is None else f"{objective.kind} ({len(objective.states)} states)"
    print(f"ok: {kind} game, {len(game.states)} states, objective {obj}")


def cmd_solve_safety(args):
    game, objective = load_game(args.file)
    safe = _objective(game, objective, "safety")
    rep = solve_safety(
        game, safe, max_iter=args.max_iters, epsilon=args.epsilon,
        upper_bound="value-iteration" if args.epsilon is not None else None,
        vi_rounds=args.vi_rounds, precision=args.precision,
    )
    meta = {
        "iterations": rep.n_iter,
        "stopReason": rep.stop_reason,
        "terminated": rep.terminated,
        "w1": sorted(rep.w1, key=game.states.index),
        "gap": None if rep.gap is None else format_rational(rep.gap),
    }
    if args.trace:
        write_trace(args.trace, trace_records(rep.records, rep.upper))
    _emit(args, result_dict("solve-safety", rep.lower_bound, digits=args.digits,
                            strategy=rep.final_selector, metadata=meta, upper=rep.upper_bound))


def cmd_solve_reach(args):
    game, objective = load_game(args.file)
    target = _objective(game, objective, "reachability")
    if isinstance(game, TurnBasedGame):
        res = tb_reach_strategy_improvement(game, target)
        meta = {"iterations": res.iterations, "method": "strategy-improvement",
                "stopReason": "ExactTermination"}
        bound = termination_bound(game)
        meta["bounds"] = {"stepBound": bound.step_bound, "strategyBound": bound.strategy_bound}
        _emit(args, result_dict("solve-reach", res.values, digits=args.digits,
                                strategy=res.selector, metadata=meta))
        return
    if args.epsilon is not None:
        # Reach(T) for player 1 is the complement of Safe(S \ T) for player 2.
        swapped = swap_players(game)
        rep = anytime_solve(swapped, set(game.states) - target, args.epsilon,
                            max_iter=args.max_iters, precision=args.precision)
        lower = {s: 1 - x for s, x in rep.upper_bound.items()}
        upper = {s: 1 - x for s, x in rep.lower_bound.items()}
        meta = {"method": "sandwich", "stopReason": rep.stop_reason, "gap": format_rational(rep.gap),
                "iterations": len(rep.lower)}
        _emit(args, result_dict("solve-reach", lower, digits=args.digits, metadata=meta, upper=upper))
        return
    its = value_iteration_reach(game, target, 1, args.rounds, args.precision)
    meta = {"method": "value-iteration", "rounds": args.rounds, "stopReason": "RoundCap"}
    _emit(args, result_dict("solve-reach", its[-1], digits=args.digits, metadata=meta))


def cmd_anytime(args):
    game, objective = load_game(args.file)
    safe = _objective(game, objective, "safety")
    rep = anytime_solve(game, safe, args.epsilon, max_iter=args.max_iters,
                        vi_rounds=args.vi_rounds, precision=args.precision)
    meta = {"iterations": len(rep.lower), "upperIterations": len(rep.upper) - 1,
            "stopReason": rep.stop_reason, "gap": format_rational(rep.gap)}
    if args.trace:
        write_trace(args.trace, trace_records(rep.solve.records, rep.upper))
    _emit(args, result_dict("anytime", rep.lower_bound, digits=args.digits, metadata=meta,
                            upper=rep.upper_bound, strategy=rep.solve.final_selector))


def _turn_based(game):
    if not isinstance(game, TurnBasedGame):
        raise UsageError("this command needs a turn-based game")
    return game


def cmd_to_binary(args):
    game, objective = load_game(args.file)
    _turn_based(game)
    out, origin = binary_transform_with_origin(game)
    if objective is not None:
        # auxiliary states inherit membership from the state they serve
        objective = Objective(objective.kind, {s for s in out.states if origin[s] in objective.states})
    text = dump_game(out, objective)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_bounds(args):
    game, _ = load_game(args.file)
    b = termination_bound(_turn_based(game))
    _emit(args, {"stepBound": b.step_bound, "strategyBound": b.strategy_bound,
                 "bound": b.bound, "transformed": b.transformed,
                 "states": b.n_states, "randomStates": b.n_random})


def cmd_reduce(args):
    game, objective = load_game(args.file)
    safe = _objective(game, objective, "safety")
    if isinstance(game, TurnBasedGame):
        game = game.to_concurrent()
    with open(args.valuation, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "values" in data:
        data = data["values"]
    try:
        v = check_valuation(game, valuation_from_json(data))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad valuation file: {exc}")
    red = tb_reduce(game, v, safe)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(dump_game(red.game, Objective("safety", red.safe)))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="safegames", description="Exact solvers for concurrent safety games.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, epsilon_required=False):
        sp.add_argument("file")
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
        sp.add_argument("--digits", type=int, default=12, help="decimal digits in the result (default 12)")
        sp.add_argument("--max-iters", type=int, default=10_000)
        sp.add_argument("--precision", type=int, default=None,
                        help="round value-iteration iterates outward to multiples of 2^-P")
        sp.add_argument("--epsilon", type=_rational, required=epsilon_required)

    sp = sub.add_parser("validate", help="check a game file")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("solve-safety", help="strategy improvement for a safety objective")
    common(sp)
    sp.add_argument("--trace", help="NDJSON trace output")
    sp.add_argument("--vi-rounds", type=int, default=1)
    sp.set_defaults(func=cmd_solve_safety)

    sp = sub.add_parser("solve-reach", help="reachability values")
    common(sp)
    sp.add_argument("--rounds", type=int, default=100, help="value-iteration rounds (concurrent games)")
    sp.set_defaults(func=cmd_solve_reach)

    sp = sub.add_parser("anytime", help="certified lower and upper bounds within epsilon")
    common(sp, epsilon_required=True)
    sp.add_argument("--trace", help="NDJSON trace output")
    sp.add_argument("--vi-rounds", type=int, default=1)
    sp.set_defaults(func=cmd_anytime, precision=40)

    sp = sub.add_parser("to-binary", help="rewrite random states as fair coin flips")
    sp.add_argument("file")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_to_binary)

    sp = sub.add_parser("bounds", help="iteration bounds for turn-based reachability")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("reduce", help="emit the turn-based reduction around a valuation")
    sp.add_argument("file")
    sp.add_argument("--valuation", required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InvalidGameError as exc:
        print(f"invalid game: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, TraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
