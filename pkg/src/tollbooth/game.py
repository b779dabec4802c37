"""Atomic network congestion games with unsplittable flows.

All costs are exact :class:`fractions.Fraction` values.  A cost table for an
edge lists ``c(1), ..., c(n + 1)`` for a game with ``n`` players; the load-0
value is never read.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

# Symbolic infinity for tollability lists.  It compares above every Fraction
# and absorbs addition; it never enters game cost tables.
INF = math.inf

State = Mapping[int, Sequence[str]]
Tolls = Mapping[str, Fraction]


class GameError(ValueError):
    """Raised when a game, state or toll vector violates its invariants."""


def as_rational(value) -> Fraction:
    """Parse an int, a Fraction or a ``"p/q"`` string into a Fraction."""
    if isinstance(value, bool):
        raise GameError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GameError(f"not a rational: {value!r}") from exc
    raise GameError(f"not a rational: {value!r} (floats are not accepted)")


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise GameError(f"node {node!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph; parallel edges are allowed, self-loops are not."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise GameError("duplicate node ids")
        by_id = {}
        adj = {x: [] for x in self.nodes}
        for e in self.edges:
            if e.id in by_id:
                raise GameError(f"duplicate edge id {e.id!r}")
            if e.u not in node_set or e.v not in node_set:
                raise GameError(f"edge {e.id!r} has an undeclared endpoint")
            if e.u == e.v:
                raise GameError(f"edge {e.id!r} is a self-loop")
            by_id[e.id] = e
            adj[e.u].append(e)
            adj[e.v].append(e)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_adj", adj)

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._by_id[edge_id]
        except KeyError:
            raise GameError(f"unknown edge id {edge_id!r}") from None

    def incident(self, node: str) -> list[Edge]:
        return self._adj[node]

    def edge_ids(self) -> list[str]:
        return [e.id for e in self.edges]


@dataclass(frozen=True)
class Player:
    id: int
    source: str
    sink: str


@dataclass(frozen=True)
class Game:
    graph: Multigraph
    players: tuple[Player, ...]
    costs: Mapping[str, tuple[Fraction, ...]]

    def __post_init__(self):
        n = len(self.players)
        if n == 0:
            raise GameError("a game needs at least one player")
        if [p.id for p in self.players] != list(range(1, n + 1)):
            raise GameError("player ids must be 1..n in order")
        nodes = set(self.graph.nodes)
        for p in self.players:
            if p.source not in nodes or p.sink not in nodes:
                raise GameError(f"player {p.id} has an unknown terminal")
            if p.source == p.sink:
                raise GameError(f"player {p.id} has source == sink")
        costs = {}
        for e in self.graph.edges:
            if e.id not in self.costs:
                raise GameError(f"missing cost table for edge {e.id!r}")
            table = tuple(as_rational(x) for x in self.costs[e.id])
            if len(table) != n + 1:
                raise GameError(
                    f"cost table of edge {e.id!r} has {len(table)} values, "
                    f"expected {n + 1} (loads 1..n+1)"
                )
            if table[0] < 0:
                raise GameError(f"negative cost on edge {e.id!r}")
            if any(a > b for a, b in zip(table, table[1:])):
                raise GameError(f"cost table of edge {e.id!r} is not nondecreasing")
            costs[e.id] = table
        if set(self.costs) - set(costs):
            raise GameError("cost table given for an unknown edge")
        object.__setattr__(self, "costs", costs)
        for p in self.players:
            if p.sink not in _reachable(self.graph, p.source):
                raise GameError(f"player {p.id} has no source-sink path")

    @property
    def n_players(self) -> int:
        return len(self.players)

    def player(self, pid: int) -> Player:
        if not 1 <= pid <= len(self.players):
            raise GameError(f"unknown player {pid}")
        return self.players[pid - 1]

    def cost(self, edge_id: str, load: int) -> Fraction:
        """``c_e(load)`` for ``1 <= load <= n + 1``."""
        if not 1 <= load <= len(self.players) + 1:
            raise GameError(f"load {load} outside the table of edge {edge_id!r}")
        return self.costs[edge_id][load - 1]

    def is_symmetric(self) -> bool:
        first = self.players[0]
        return all(p.source == first.source and p.sink == first.sink for p in self.players)


def _reachable(graph: Multigraph, start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for e in graph.incident(x):
            y = e.other(x)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def make_game(nodes, edges, players) -> Game:
    """Convenience constructor.

    ``edges`` is an iterable of ``(id, u, v, cost_table)`` and ``players`` of
    ``(source, sink)``; player ids are assigned 1..n in order.
    """
    edge_objs = []
    costs = {}
    for eid, u, v, table in edges:
        edge_objs.append(Edge(str(eid), str(u), str(v)))
        costs[str(eid)] = tuple(table)
    graph = Multigraph(tuple(str(x) for x in nodes), tuple(edge_objs))
    ps = tuple(Player(i, str(s), str(t)) for i, (s, t) in enumerate(players, start=1))
    return Game(graph, ps, costs)


def path_nodes(game: Game, player: int, path: Sequence[str]) -> list[str]:
    """Node sequence visited by ``path``; raises if it is not a simple
    source-sink path of ``player``."""
    p = game.player(player)
    here = p.source
    visited = [here]
    for eid in path:
        e = game.graph.edge(eid)
        if here not in (e.u, e.v):
            raise GameError(f"path of player {player} is not connected at edge {eid!r}")
        here = e.other(here)
        if here in visited:
            raise GameError(f"path of player {player} revisits node {here!r}")
        visited.append(here)
    if here != p.sink:
        raise GameError(f"path of player {player} does not end at its sink")
    return visited


def check_state(game: Game, state: State) -> dict[int, tuple[str, ...]]:
    """Validate a state and return it as ``{player: tuple(edge ids)}``."""
    keys = set(state)
    expected = {p.id for p in game.players}
    if keys != expected:
        raise GameError(f"state must list exactly players {sorted(expected)}")
    out = {}
    for pid in sorted(expected):
        path = tuple(str(x) for x in state[pid])
        path_nodes(game, pid, path)
        out[pid] = path
    return out


def check_tolls(game: Game, tolls: Tolls | None) -> dict[str, Fraction]:
    out = {}
    for eid, value in (tolls or {}).items():
        game.graph.edge(eid)
        t = as_rational(value)
        if t < 0:
            raise GameError(f"negative toll on edge {eid!r}")
        out[eid] = t
    return out


def loads(game: Game, state: State) -> Counter:
    counts = Counter()
    for path in state.values():
        counts.update(path)
    return counts


def congestion(game: Game, state: State, edge: str) -> int:
    """Number of players whose path contains ``edge``."""
    game.graph.edge(edge)
    return sum(1 for path in state.values() if edge in path)


def player_cost(game: Game, tolls: Tolls | None, state: State, player: int) -> Fraction:
    """Cost of ``player`` in ``state`` under ``c_e(n_e(S)) + t_e``."""
    tolls = tolls or {}
    n = loads(game, state)
    return sum(
        (game.cost(e, n[e]) + tolls.get(e, 0) for e in state[player]),
        Fraction(0),
    )


def social_cost(game: Game, state: State) -> Fraction:
    """Sum of untolled player costs."""
    n = loads(game, state)
    return sum((n[e] * game.cost(e, n[e]) for e in n), Fraction(0))


def deviation_weights(game: Game, tolls: Tolls | None, state: State, player: int) -> dict[str, Fraction]:
    """Edge weights seen by ``player`` when everybody else keeps ``state``."""
    tolls = tolls or {}
    n = loads(game, state)
    own = set(state[player])
    weights = {}
    for e in game.graph.edges:
        load = n[e.id] if e.id in own else n[e.id] + 1
        weights[e.id] = game.cost(e.id, load) + tolls.get(e.id, 0)
    return weights


def best_response(game: Game, tolls: Tolls | None, state: State, player: int) -> tuple[tuple[str, ...], Fraction]:
    """Cheapest unilateral deviation of ``player``.

    Dijkstra over the deviation weights; among equal-cost paths the
    lexicographically smallest edge-id sequence wins.
    """
    weights = deviation_weights(game, tolls, state, player)
    p = game.player(player)
    graph = game.graph
    heap = [(Fraction(0), (), p.source)]
    done = set()
    while heap:
        dist, path, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == p.sink:
            return path, dist
        for e in graph.incident(node):
            nxt = e.other(node)
            if nxt not in done:
                heapq.heappush(heap, (dist + weights[e.id], path + (e.id,), nxt))
    raise GameError(f"player {player} cannot reach its sink")


def is_pne(game: Game, tolls: Tolls | None, state: State):
    """Check whether ``state`` is a pure Nash equilibrium under ``tolls``.

    Returns ``(True, None)`` or ``(False, (player, improving_path))``.
    Equal-cost deviations do not count.
    """
    for p in game.players:
        current = player_cost(game, tolls, state, p.id)
        path, cost = best_response(game, tolls, state, p.id)
        if cost < current:
            return False, (p.id, path)
    return True, None


def tolled_game(game: Game, tolls: Tolls | None) -> Game:
    """The game whose cost tables are ``c_e + t_e`` at every load."""
    tolls = check_tolls(game, tolls)
    costs = {e: tuple(c + tolls.get(e, 0) for c in table) for e, table in game.costs.items()}
    return Game(game.graph, game.players, costs)
