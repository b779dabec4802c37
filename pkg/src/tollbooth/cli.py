"""Command-line interface.

Exit codes: 0 success or a positive verdict, 1 a negative verdict, 2 invalid
input, 3 an exhausted search budget, 4 a failed internal consistency check.
"""

from __future__ import annotations

import argparse
import csv
import logging
import random
import sys
import time
from typing import Sequence

from . import io
from .game import GameError, best_response, is_pne, player_cost, social_cost
from .generate import random_sp_instance
from .mintb import ListInvariantError, run
from .oracle import Budget, BudgetExceeded, NotImplementable, min_tollbooths, social_optimum
from .reduction import (
    STAGES,
    FormulaError,
    build_game,
    build_intended_state,
    extract_from_game,
    min_weight_sat,
    parse_dimacs,
    verify_properties,
)
from .spgraph import (
    NotSeriesParallel,
    SPError,
    annotate,
    parse_term,
    postorder,
    recognize,
    symmetric_terminals,
    to_term,
)

log = logging.getLogger("tollbooth")

BENCH_SIZES = (250, 500, 1000, 2000, 4000)


class UsageError(Exception):
    pass


def _budget(args) -> Budget:
    for name in ("max_states", "max_subset_size", "max_paths"):
        if getattr(args, name) <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return Budget(args.max_states, args.max_subset_size, args.max_paths)


def _load_game(path):
    return io.game_from_obj(io.read_json(path))


def _load_state(path, game):
    return io.state_from_obj(io.read_json(path), game)


def _load_tolls(path, game):
    return io.tolls_from_obj(io.read_json(path), game) if path else {}


def _read_cnf(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dimacs(fh.read())


def _parse_assignment(text: str, n: int) -> tuple[int, ...]:
    digits = text.replace(",", "").replace(" ", "")
    if len(digits) != n or set(digits) - {"0", "1"}:
        raise UsageError(f"--assignment needs {n} digits 0/1, e.g. {'1' * n}")
    return tuple(int(c) for c in digits)


def _parse_choice(text: str | None):
    if not text:
        return None
    out = {}
    for item in text.split(","):
        try:
            clause, lit = item.split(":")
            out[int(clause)] = int(lit)
        except ValueError:
            raise UsageError(f"bad --choice item {item!r}; expected clause:literal") from None
    return out


def _report(args, text: str) -> None:
    # human-readable lines go to stderr when the data itself goes to stdout
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    print(text, file=stream)


# -- subcommands --------------------------------------------------------------

def cmd_solve_sp(args) -> int:
    game = _load_game(args.game)
    state = _load_state(args.state, game)
    tree = None
    if args.tree:
        source, sink = symmetric_terminals(game)
        tree = parse_term(args.tree, game.graph, source, sink)
    sol = run(game, state, tree, check=args.debug_lists)
    io.write_text(args.out, io.dumps(io.tolls_to_obj(sol.tolls)))
    if args.debug_lists:
        _dump_lists(sol)
    _report(args, f"tolled edges: {sol.count}")
    _report(args, f"lambda0: {sol.lambda0}")
    return 0


def _dump_lists(sol) -> None:
    for node in postorder(sol.tree):
        lst = sol.lists[id(node)]
        pairs = " ".join(f"({e.eta},{e.lam})" for e in lst.entries)
        print(f"{to_term(node)}  lambda0={lst.lambda0}  {pairs}", file=sys.stderr)


def cmd_check(args) -> int:
    game = _load_game(args.game)
    state = _load_state(args.state, game)
    tolls = _load_tolls(args.tolls, game)
    ok, witness = is_pne(game, tolls, state)
    if ok:
        print("PNE: yes")
        return 0
    pid, path = witness
    _, new_cost = best_response(game, tolls, state, pid)
    print("PNE: no")
    print(f"player {pid} improves from {player_cost(game, tolls, state, pid)} to {new_cost} "
          f"via {','.join(path)}")
    return 1


def cmd_oracle_opt(args) -> int:
    game = _load_game(args.game)
    incumbent = _load_state(args.incumbent, game) if args.incumbent else None
    state, cost = social_optimum(game, incumbent, _budget(args))
    io.write_text(args.out, io.dumps(io.state_to_obj(state)))
    _report(args, f"social cost: {cost}")
    return 0


def cmd_oracle_mintb(args) -> int:
    game = _load_game(args.game)
    state = _load_state(args.state, game)
    try:
        count, tolls, _ = min_tollbooths(game, state, _budget(args))
    except NotImplementable as exc:
        print(f"not implementable: {exc}", file=sys.stderr)
        return 1
    io.write_text(args.out, io.dumps(io.tolls_to_obj(tolls)))
    _report(args, f"tolled edges: {count}")
    return 0


def cmd_recognize(args) -> int:
    game = _load_game(args.game)
    if args.source or args.sink:
        if not (args.source and args.sink):
            raise UsageError("give both --source and --sink")
        source, sink = args.source, args.sink
    else:
        source, sink = symmetric_terminals(game)
    try:
        tree = recognize(game.graph, source, sink)
    except NotSeriesParallel as exc:
        print(f"not series-parallel: {exc}")
        return 1
    print(to_term(tree))
    return 0


def cmd_reduce(args) -> int:
    gadget = build_game(_read_cnf(args.cnf), args.stage)
    io.write_text(args.out, io.dumps(io.game_to_obj(gadget.game)))
    if args.roles:
        io.write_text(args.roles, io.dumps(gadget.roles_obj()))
    _report(args, f"players: {gadget.game.n_players}")
    return 0


def cmd_intended_state(args) -> int:
    formula = _read_cnf(args.cnf)
    gadget = build_game(formula, args.stage)
    assignment = _parse_assignment(args.assignment, formula.n_vars)
    state = build_intended_state(formula, gadget, assignment, _parse_choice(args.choice))
    io.write_text(args.out, io.dumps(io.state_to_obj(state)))
    _report(args, f"social cost: {social_cost(gadget.game, state)}")
    return 0


def cmd_extract(args) -> int:
    game = _load_game(args.game)
    tolls = _load_tolls(args.tolls, game)
    assignment = extract_from_game(game, tolls)
    print("".join(map(str, assignment)))
    return 0


def cmd_verify_reduction(args) -> int:
    formula = _read_cnf(args.cnf)
    gadget = build_game(formula, args.stage)
    budget = _budget(args)
    if args.state:
        state = _load_state(args.state, gadget.game)
    elif args.optimum:
        state, _ = social_optimum(gadget.game, budget=budget)
    else:
        best = min_weight_sat(formula)
        if best is None:
            raise UsageError("formula is unsatisfiable; pass --state or --optimum")
        assignment = _parse_assignment(args.assignment, formula.n_vars) if args.assignment else best[1]
        state = build_intended_state(formula, gadget, assignment)
    report = verify_properties(formula, gadget, state, budget)
    print(io.dumps(report.to_obj()), end="")
    return 0 if report.ok else 1


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",")] if args.sizes else list(BENCH_SIZES)
    if any(m < 1 for m in sizes) or args.players < 1:
        raise UsageError("sizes and --players must be positive")
    rng = random.Random(args.seed)
    rows = []
    for m in sizes:
        seed = rng.randrange(2**31)
        tree, game, state = random_sp_instance(m, args.players, seed)
        t0 = time.perf_counter()
        source, sink = symmetric_terminals(game)
        built = recognize(game.graph, source, sink)
        annotate(built, game, state)
        t1 = time.perf_counter()
        sol = run(game, state, built)
        t2 = time.perf_counter()
        rows.append({
            "m": m,
            "n_players": args.players,
            "build_ms": round((t1 - t0) * 1000, 3),
            "solve_ms": round((t2 - t1) * 1000, 3),
            "tolled_edges": sol.count,
        })
        log.info("m=%d solved in %.1f ms", m, (t2 - t1) * 1000)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(out, fieldnames=["m", "n_players", "build_ms", "solve_ms", "tolled_edges"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tollbooth", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def budgets(p):
        p.add_argument("--max-states", type=int, default=Budget.max_states)
        p.add_argument("--max-subset-size", type=int, default=Budget.max_subset_size)
        p.add_argument("--max-paths", type=int, default=Budget.max_paths)

    def out(p):
        p.add_argument("--out", "-o", help="output file (default: stdout)")

    p = sub.add_parser("solve-sp", help="minimum tolls on a series-parallel game")
    p.add_argument("--game", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--tree", help="parse tree term; recognized from the graph if omitted")
    p.add_argument("--debug-lists", action="store_true", help="print every tollability list")
    out(p)
    p.set_defaults(func=cmd_solve_sp)

    p = sub.add_parser("check", help="is the state a pure Nash equilibrium under the tolls")
    p.add_argument("--game", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--tolls")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle-opt", help="social optimum by branch and bound")
    p.add_argument("--game", required=True)
    p.add_argument("--incumbent", help="state whose cost seeds the bound")
    budgets(p)
    out(p)
    p.set_defaults(func=cmd_oracle_opt)

    p = sub.add_parser("oracle-mintb", help="exact minimum tollbooths by subset search")
    p.add_argument("--game", required=True)
    p.add_argument("--state", required=True)
    budgets(p)
    out(p)
    p.set_defaults(func=cmd_oracle_mintb)

    p = sub.add_parser("recognize", help="parse tree of a series-parallel graph")
    p.add_argument("--game", required=True)
    p.add_argument("--source")
    p.add_argument("--sink")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("reduce", help="gadget game of a DIMACS formula")
    p.add_argument("--cnf", required=True)
    p.add_argument("--stage", choices=STAGES, default="g3")
    p.add_argument("--roles", help="write the role sidecar here")
    out(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("intended-state", help="intended state of the gadget game")
    p.add_argument("--cnf", required=True)
    p.add_argument("--assignment", required=True, help="0/1 digits, one per variable")
    p.add_argument("--choice", help="clause:literal pairs, e.g. 1:1,2:-2")
    p.add_argument("--stage", choices=STAGES, default="g3")
    out(p)
    p.set_defaults(func=cmd_intended_state)

    p = sub.add_parser("extract", help="assignment read off the variable edges' tolls")
    p.add_argument("--game", required=True)
    p.add_argument("--tolls", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify-reduction", help="check the gadget's four properties")
    p.add_argument("--cnf", required=True)
    p.add_argument("--stage", choices=STAGES, default="g3")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--state", help="state to check (default: intended state)")
    group.add_argument("--optimum", action="store_true", help="check a computed social optimum")
    group.add_argument("--assignment", help="assignment for the intended state")
    budgets(p)
    p.set_defaults(func=cmd_verify_reduction)

    p = sub.add_parser("bench", help="time the solver on random series-parallel games (CSV)")
    p.add_argument("--sizes", help="comma-separated edge counts (default: 250,...,4000)")
    p.add_argument("--players", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    out(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (GameError, SPError, FormulaError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ListInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
