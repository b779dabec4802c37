"""Seeded random instances: series-parallel games, states, general games,
CNF formulas.

Generator used by ``bench`` and the tests: a tree with ``m`` edges is a
single edge when ``m == 1``; otherwise ``m`` is split uniformly into two
positive parts, combined in series or parallel with equal probability.
Leaves are then bundled (:func:`normalize`) and given synthetic terminals.
Cost tables are integer and nondecreasing: ``c(1)`` uniform in
``[0, max_cost]``, each later value adds a uniform step capped at
``max_cost``.  Each player of a random state picks a uniform branch at
every parallel node and a uniform link at every leaf.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .game import Game, make_game
from .spgraph import Leaf, Parallel, Series, SPTree, assign_terminals, flatten, normalize, postorder


def random_sp_tree(m: int, rng: random.Random, prefix: str = "e") -> SPTree:
    if m < 1:
        raise ValueError("a tree needs at least one edge")
    ids = iter(f"{prefix}{i}" for i in range(1, m + 1))
    # iterative build: (size, slot) work items filled bottom-up
    root: list = [None]
    work = [(m, root, 0)]
    pending = []
    while work:
        size, holder, slot = work.pop()
        if size == 1:
            holder[slot] = Leaf((next(ids),))
            continue
        k = rng.randint(1, size - 1)
        kind = Series if rng.random() < 0.5 else Parallel
        kids: list = [None, None]
        pending.append((kind, kids, holder, slot))
        work.append((size - k, kids, 1))
        work.append((k, kids, 0))
    for kind, kids, holder, slot in reversed(pending):
        holder[slot] = kind(kids[0], kids[1])
    return assign_terminals(normalize(root[0]))


def random_table(n_players: int, rng: random.Random, max_cost: int = 10) -> tuple[Fraction, ...]:
    value = rng.randint(0, max_cost)
    table = [value]
    for _ in range(n_players):
        value = min(max_cost, value + rng.randint(0, max(1, max_cost // 3)))
        table.append(value)
    return tuple(Fraction(x) for x in table)


def sp_game(tree: SPTree, n_players: int, rng: random.Random, max_cost: int = 10) -> Game:
    graph = flatten(tree)
    edges = [(e.id, e.u, e.v, random_table(n_players, rng, max_cost)) for e in graph.edges]
    return make_game(graph.nodes, edges, [(tree.source, tree.sink)] * n_players)


def random_sp_path(tree: SPTree, rng: random.Random) -> tuple[str, ...]:
    """A uniformly branching source-sink path, in traversal order."""
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.append(rng.choice(node.edges))
        elif isinstance(node, Series):
            stack.append(node.right)
            stack.append(node.left)
        else:
            stack.append(node.left if rng.random() < 0.5 else node.right)
    return tuple(out)


def random_sp_instance(m: int, n_players: int, seed: int, max_cost: int = 10):
    """``(tree, game, state)`` for a random symmetric series-parallel game."""
    rng = random.Random(seed)
    tree = random_sp_tree(m, rng)
    game = sp_game(tree, n_players, rng, max_cost)
    state = {p.id: random_sp_path(tree, rng) for p in game.players}
    return tree, game, state


def random_general_game(n_nodes: int, n_edges: int, n_players: int, seed: int, max_cost: int = 10):
    """A connected multigraph game with random source-sink pairs and a
    random simple path per player.  Returns ``(game, state)``."""
    rng = random.Random(seed)
    nodes = [f"v{i}" for i in range(n_nodes)]
    pairs = []
    for i in range(1, n_nodes):  # random spanning tree keeps it connected
        pairs.append((nodes[rng.randrange(i)], nodes[i]))
    while len(pairs) < max(n_edges, n_nodes - 1):
        a, b = rng.sample(nodes, 2)
        pairs.append((a, b))
    edges = [(f"e{i}", a, b, random_table(n_players, rng, max_cost)) for i, (a, b) in enumerate(pairs, 1)]
    ends = [tuple(rng.sample(nodes, 2)) for _ in range(n_players)]
    game = make_game(nodes, edges, ends)
    state = {p.id: _random_walk_path(game, p.source, p.sink, rng) for p in game.players}
    return game, state


def _random_walk_path(game: Game, source: str, sink: str, rng: random.Random) -> tuple[str, ...]:
    # randomized DFS: returns the first simple path found
    stack = [(source, (), frozenset([source]))]
    while stack:
        node, path, seen = stack.pop()
        if node == sink:
            return path
        options = list(game.graph.incident(node))
        rng.shuffle(options)
        for e in options:
            nxt = e.other(node)
            if nxt not in seen:
                stack.append((nxt, path + (e.id,), seen | {nxt}))
    raise ValueError("sink unreachable")


def random_cnf(n_vars: int, n_clauses: int, seed: int, max_width: int = 3):
    """Clauses as lists of nonzero DIMACS literals, no repeated variable."""
    rng = random.Random(seed)
    clauses = []
    for _ in range(n_clauses):
        width = rng.randint(1, min(max_width, n_vars))
        chosen = rng.sample(range(1, n_vars + 1), width)
        clauses.append([v if rng.random() < 0.5 else -v for v in sorted(chosen)])
    return n_vars, clauses


def tree_size(tree: SPTree) -> int:
    return sum(len(x.edges) for x in postorder(tree) if isinstance(x, Leaf))
