"""Canonical JSON for games, states, tolls and assignments.

Cost values are written as integers when integral and as ``"p/q"`` strings
otherwise; toll values are always strings.  Keys are sorted so equal values
serialize to equal bytes.  Floats are rejected on input.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .game import Game, GameError, as_rational, check_state, check_tolls, make_game


def rational_out(x) -> int | str:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _reject_float(text):
    raise GameError(f"floating-point literal {text!r} is not allowed; use \"p/q\"")


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise GameError(f"invalid JSON: {exc}") from exc


def game_to_obj(game: Game) -> dict:
    return {
        "nodes": list(game.graph.nodes),
        "edges": [
            {"id": e.id, "u": e.u, "v": e.v, "cost": [rational_out(c) for c in game.costs[e.id]]}
            for e in game.graph.edges
        ],
        "players": [{"id": p.id, "source": p.source, "sink": p.sink} for p in game.players],
    }


def game_from_obj(obj: Any) -> Game:
    try:
        nodes = obj["nodes"]
        edges = [(e["id"], e["u"], e["v"], [as_rational(c) for c in e["cost"]]) for e in obj["edges"]]
        players = sorted(obj["players"], key=lambda p: p["id"])
        ends = [(p["source"], p["sink"]) for p in players]
    except (KeyError, TypeError) as exc:
        raise GameError(f"malformed game document: {exc!r}") from exc
    if [p["id"] for p in players] != list(range(1, len(players) + 1)):
        raise GameError("player ids must be 1..n")
    return make_game(nodes, edges, ends)


def state_to_obj(state) -> dict:
    return {str(pid): list(path) for pid, path in sorted(state.items())}


def state_from_obj(obj: Any, game: Game | None = None) -> dict[int, tuple[str, ...]]:
    if not isinstance(obj, dict):
        raise GameError("a state document is an object keyed by player id")
    try:
        state = {int(k): tuple(v) for k, v in obj.items()}
    except (ValueError, TypeError) as exc:
        raise GameError(f"malformed state document: {exc!r}") from exc
    return check_state(game, state) if game is not None else state


def tolls_to_obj(tolls) -> dict:
    # toll values are always strings, e.g. {"e1": "1", "e2": "3/2"}
    return {e: str(Fraction(t)) for e, t in sorted(tolls.items()) if t > 0}


def tolls_from_obj(obj: Any, game: Game | None = None) -> dict[str, Fraction]:
    if not isinstance(obj, dict):
        raise GameError("a toll document is an object keyed by edge id")
    if game is not None:
        return check_tolls(game, obj)
    return {str(e): as_rational(t) for e, t in obj.items()}


def read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads_json(fh.read())


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
