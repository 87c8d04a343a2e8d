"""Command-line workbench: evaluate formulas, solve games, play the
truth-telling game, and run the verification suites.

Exit codes: 0 success, 1 suite failure, 2 usage or parse error, 3 resource
bound exceeded.  Budgets honor the HFGAMES_MAX_RANK, HFGAMES_NODE_BUDGET,
HFGAMES_PLAY_CAP, and HFGAMES_CLOCK_FACTOR environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Optional

from . import etr, games, logic, suites, truthgames
from .errors import HFGamesError, ParseError, ResourceBoundError
from .universe import (
    MAX_RANK,
    WellFoundedRelation,
    build_universe,
    parse_ordinal,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"bad value for {name}: {raw!r}")


def _max_rank() -> int:
    return _env_int("HFGAMES_MAX_RANK", MAX_RANK)


def _parse_pred(spec: str) -> tuple[str, frozenset]:
    name, _, body = spec.partition("=")
    if not name or not body:
        raise ParseError(f"predicate spec must be NAME=tuples, got {spec!r}")
    tuples = set()
    for chunk in body.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        tuples.add(tuple(int(x) for x in chunk.split(",")))
    return name, frozenset(tuples)


def _structure(args) -> logic.Structure:
    U = build_universe(args.rank, _max_rank())
    preds = dict(_parse_pred(spec) for spec in (args.pred or []))
    return logic.Structure(U, preds)


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    M = _structure(args)
    f = logic.parse_formula(args.formula, M.signature() or None)
    free = logic.free_vars(f)
    if free:
        raise ParseError(f"formula has free variables {sorted(free)}; bind or substitute them")
    inst = logic.instance(f, {})
    verdict = logic.eval_instance(M, inst)
    witness: Optional[int] = None
    if verdict and isinstance(f, logic.Exists):
        witness = logic.skolem_witness(M, inst)
    if args.json:
        print(json.dumps(
            {"formula": logic.to_text(f), "verdict": verdict, "witness": witness},
            sort_keys=True,
        ))
    else:
        line = "true" if verdict else "false"
        if witness is not None:
            line += f", witness #{witness}"
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _solve_choice(args) -> dict:
    U = build_universe(args.rank, _max_rank())
    G = games.choice_game(U)
    winner, strat = games.value_strategy(G)
    _, label_winner, _ = games.label_clopen(G)
    verified = games.verify_strategy(G, strat).ok
    return {
        "game": "choice",
        "rank": args.rank,
        "winner": winner,
        "strategy": json.loads(games.strategy_to_json(strat)),
        "cross_check": {
            "label_winner": label_winner,
            "agrees": label_winner == winner,
            "strategy_verified": verified,
        },
    }


def _solve_random_clopen(args) -> dict:
    rng = random.Random(f"solve:{args.seed}")
    G = games.random_clopen_game(rng, max_nodes=args.max_nodes, max_cap=args.cap)
    winner, strat = games.value_strategy(G)
    _, label_winner, label_strat = games.label_clopen(G)
    return {
        "game": "random-clopen",
        "seed": args.seed,
        "nodes": games.count_nodes(G),
        "winner": winner,
        "strategy": json.loads(games.strategy_to_json(strat)),
        "cross_check": {
            "label_winner": label_winner,
            "agrees": label_winner == winner,
            "strategy_verified": games.verify_strategy(G, strat).ok,
            "label_strategy_verified": games.verify_strategy(G, label_strat).ok,
        },
    }


def _solve_truthtelling(args) -> dict:
    M = _structure(args)
    game = truthgames.truth_game(M)
    if args.teller != "honest":
        raise ParseError(f"unknown teller {args.teller!r}")
    teller = truthgames.honest_teller(game, M)
    search = truthgames.interrogator_search(game, teller, depth=args.depth)
    rng = random.Random(f"truthtelling:{args.seed}")
    random_losses = 0
    for _ in range(args.random_interrogators):
        t = truthgames.play_truth_game(
            game, truthgames.RandomInterrogator(rng, depth=6), teller
        )
        if t.status == truthgames.INTERROGATOR_WINS:
            random_losses += 1
    targets = logic.enumerate_instances(M, 3)
    extracted = truthgames.extract_satisfaction(teller, game, targets)
    return {
        "game": "truthtelling",
        "rank": args.rank,
        "winner": "teller" if search.plan is None and random_losses == 0 else "interrogator",
        "interrogator_search": {
            "depth": args.depth,
            "proven_none": search.proven_none,
            "nodes": search.nodes,
        },
        "random_interrogators": {
            "count": args.random_interrogators,
            "losses": random_losses,
        },
        "extracted_class_size": len(extracted.entries),
        "extracted_targets": len(targets),
    }


def _solve_recursion(args) -> dict:
    M = _structure(args)
    size = min(M.universe.size, 4)
    nodes = list(range(size))
    edges = frozenset((nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1))
    rel = WellFoundedRelation(frozenset(nodes), edges)
    rule = etr.RecursionRule.parse("x = #0 | Ej. ((j <| i) & F(j, x))")
    solution = etr.etr_solve(M, rel, rule)
    game = truthgames.recursion_game(M, rel, rule)
    teller = truthgames.honest_teller(game, M, solution=solution)
    extracted = truthgames.extract_solution(teller, game)
    return {
        "game": "recursion",
        "rank": args.rank,
        "relation": {"nodes": nodes, "edges": sorted(map(list, edges))},
        "rule": logic.to_text(rule.formula),
        "winner": "teller",
        "solution": extracted.serialize().splitlines(),
        "round_trip_exact": extracted.pairs == solution.pairs,
        "check_solution": etr.check_solution(M, rel, rule, extracted),
    }


def cmd_solve(args) -> int:
    handlers = {
        "choice": _solve_choice,
        "random-clopen": _solve_random_clopen,
        "truthtelling": _solve_truthtelling,
        "recursion": _solve_recursion,
    }
    doc = handlers[args.game](args)
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        print(f"game: {doc['game']}")
        print(f"winner: {doc['winner']}")
        for key, value in sorted(doc.items()):
            if key in ("game", "winner"):
                continue
            print(f"{key}: {json.dumps(value, sort_keys=True)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# play


def cmd_play(args) -> int:
    M = _structure(args)
    mode = truthgames.ORDINAL if args.clock_mode == "ordinal" else truthgames.NATURAL
    game = truthgames.truth_game(M, mode)
    teller = truthgames.honest_teller(game, M)
    if args.replay:
        with open(args.replay, "r", encoding="utf-8") as fh:
            transcript = truthgames.transcript_from_json(game, fh.read())
        transcript.status = truthgames.referee(game, transcript)
        print(truthgames.transcript_to_json(game, transcript))
        return EXIT_OK
    if not args.interactive:
        raise ParseError("play needs --interactive or --replay FILE")
    transcript = _interactive_loop(game, teller, args.clock)
    print(truthgames.transcript_to_json(game, transcript))
    return EXIT_OK


def _interactive_loop(game, teller, clock: int) -> truthgames.Transcript:
    err = sys.stderr
    sig = game.structure.signature() or None
    transcript = truthgames.Transcript()
    state = truthgames.RefereeState(game)
    print(f"You are the interrogator; the clock starts at {clock}.", file=err)
    print("Type a closed formula per turn (empty line or 'quit' to stop).", file=err)
    remaining = clock
    while remaining > 0:
        print(f"clock {remaining}> ", end="", file=err, flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line or line == "quit":
            break
        try:
            inquiry = logic.parse_instance(line, sig)
        except HFGamesError as exc:
            print(f"  ! {exc}", file=err)
            continue
        pron = teller.answer(game, inquiry, game.clock(remaining), transcript.rounds)
        rnd = truthgames.Round(game.clock(remaining), inquiry, pron)
        transcript.rounds.append(rnd)
        reply = "true" if pron.verdict else "false"
        if pron.witness is not None:
            reply += f", witness #{pron.witness}"
        print(f"  teller: {reply}", file=err)
        violations = state.process_round(rnd)
        if violations:
            print(f"  violation! {violations[0]}", file=err)
            break
        remaining -= 1
    if remaining == 0:
        transcript.rounds.append(truthgames.Round(game.clock(0), None, None))
    transcript.status = truthgames.referee(game, transcript)
    print(f"status: {transcript.status}", file=err)
    return transcript


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    cfg = suites.RunConfig(
        universe_rank=args.rank,
        random_rank=max(args.rank, args.random_rank),
        play_cap=_env_int("HFGAMES_PLAY_CAP", args.cap),
        clock_budget_factor=_env_int("HFGAMES_CLOCK_FACTOR", 2),
        seed=args.seed,
        node_budget=_env_int("HFGAMES_NODE_BUDGET", args.node_budget),
        output="json" if args.json else "text",
    )
    try:
        reports = suites.run_suite(args.suite, cfg, inject_bug=args.inject_bug)
    except KeyError as exc:
        raise ParseError(str(exc))
    if args.json:
        print(json.dumps([json.loads(r.to_json()) for r in reports], sort_keys=True))
    else:
        for r in reports:
            print(r.to_text())
    if any(r.hit_resource_bound for r in reports):
        return EXIT_RESOURCE
    if any(r.failed for r in reports):
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfgames",
        description="Desk-scale determinacy games, truth predicates, and transfinite recursion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a closed formula over V_rank")
    p_eval.add_argument("formula")
    p_eval.add_argument("--rank", type=int, default=2)
    p_eval.add_argument("--pred", action="append", metavar="NAME=a,b;c,d")
    p_eval.add_argument("--json", action="store_true")
    p_eval.set_defaults(fn=cmd_eval)

    p_solve = sub.add_parser("solve", help="solve a built-in game")
    p_solve.add_argument(
        "game", choices=["choice", "random-clopen", "truthtelling", "recursion"]
    )
    p_solve.add_argument("--rank", type=int, default=3)
    p_solve.add_argument("--seed", type=int, default=1)
    p_solve.add_argument("--cap", type=int, default=8)
    p_solve.add_argument("--max-nodes", type=int, default=2000)
    p_solve.add_argument("--depth", type=int, default=2)
    p_solve.add_argument("--random-interrogators", type=int, default=50)
    p_solve.add_argument("--teller", default="honest")
    p_solve.add_argument("--pred", action="append")
    p_solve.add_argument("--json", action="store_true")
    p_solve.set_defaults(fn=cmd_solve)

    p_play = sub.add_parser("play", help="play the truth-telling game")
    p_play.add_argument("--interactive", action="store_true")
    p_play.add_argument("--replay", metavar="FILE")
    p_play.add_argument("--rank", type=int, default=3)
    p_play.add_argument("--clock", type=int, default=8)
    p_play.add_argument("--clock-mode", choices=["natural", "ordinal"], default="natural")
    p_play.add_argument("--pred", action="append")
    p_play.add_argument("--json", action="store_true")
    p_play.set_defaults(fn=cmd_play)

    p_verify = sub.add_parser("verify", help="run a module's property suite")
    p_verify.add_argument(
        "suite", choices=["logic", "games", "truthgames", "etr", "all"]
    )
    p_verify.add_argument("--seed", type=int, default=1)
    p_verify.add_argument("--rank", type=int, default=3)
    p_verify.add_argument("--random-rank", type=int, default=4)
    p_verify.add_argument("--cap", type=int, default=8)
    p_verify.add_argument("--node-budget", type=int, default=etr.DEFAULT_NODE_BUDGET)
    p_verify.add_argument("--inject-bug", default=None, help="mutation-test hook")
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(fn=cmd_verify)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ResourceBoundError as exc:
        print(f"resource bound exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HFGamesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
