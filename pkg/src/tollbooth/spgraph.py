"""Two-terminal series-parallel networks and their parse trees.

Term grammar (whitespace-insensitive)::

    T ::= e(<id>) | B(<id>, ...) | S(T, T) | P(T, T)

``e(x)`` is a single edge and ``B(x, y, ...)`` a bundle of parallel links;
both are leaves of the tree.  Every tree node carries its terminal pair.
Tree nodes compare by identity so they can key per-node tables.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import count
from typing import Iterator, Union

from .game import Edge, Game, GameError, Multigraph, State, check_state, loads


class SPError(ValueError):
    """Malformed term or inconsistent terminals."""


class NotSeriesParallel(SPError):
    """The graph does not reduce to a single source-sink edge."""


class NotSymmetric(GameError):
    """The game has more than one source-sink pair."""


@dataclass(frozen=True, eq=False)
class Leaf:
    edges: tuple[str, ...]
    source: str | None = None
    sink: str | None = None


@dataclass(frozen=True, eq=False)
class Series:
    left: "SPTree"
    right: "SPTree"
    source: str | None = None
    sink: str | None = None


@dataclass(frozen=True, eq=False)
class Parallel:
    left: "SPTree"
    right: "SPTree"
    source: str | None = None
    sink: str | None = None


SPTree = Union[Leaf, Series, Parallel]


def children(node: SPTree) -> tuple:
    if isinstance(node, Leaf):
        return ()
    return (node.left, node.right)


def postorder(tree: SPTree) -> Iterator[SPTree]:
    """Children before parents, left before right; no recursion."""
    stack = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded or isinstance(node, Leaf):
            yield node
        else:
            stack.append((node, True))
            stack.append((node.right, False))
            stack.append((node.left, False))


def leaves(tree: SPTree) -> list[Leaf]:
    return [x for x in postorder(tree) if isinstance(x, Leaf)]


def edge_ids(tree: SPTree) -> list[str]:
    return [e for leaf in leaves(tree) for e in leaf.edges]


def _rebuild(tree: SPTree, fn) -> SPTree:
    """Bottom-up rebuild: ``fn(node, new_children)`` returns the new node."""
    built = {}
    for node in postorder(tree):
        kids = tuple(built.pop(id(c)) for c in children(node))
        built[id(node)] = fn(node, kids)
    return built[id(tree)]


# -- term syntax ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([SPBe])\s*\(|(\))|(,)|([^\s(),]+))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SPError(f"syntax error at offset {pos}: {text[pos:pos + 10]!r}")
        if m.group(1):
            out.append(("open", m.group(1)))
        elif m.group(2):
            out.append((")", ")"))
        elif m.group(3):
            out.append((",", ","))
        else:
            out.append(("id", m.group(4)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_term(text: str, graph: Multigraph | None = None, source: str | None = None,
               sink: str | None = None) -> SPTree:
    """Parse a term into a tree.

    With ``graph`` (and its two terminals) the terminals are taken from the
    graph's edge endpoints; otherwise they are synthesized as ``s``, ``t``
    and ``m1, m2, ...`` for series midpoints.
    """
    tokens = _tokenize(text)
    pos = 0
    seen: set[str] = set()

    def expect(kind):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos][0] != kind:
            found = tokens[pos][1] if pos < len(tokens) else "end of input"
            raise SPError(f"syntax error: expected {kind!r}, found {found!r}")
        pos += 1
        return tokens[pos - 1][1]

    def ident():
        name = expect("id")
        if name in seen:
            raise SPError(f"duplicate edge id {name!r}")
        seen.add(name)
        return name

    def leaf(kind):
        nonlocal pos
        ids = [ident()]
        while kind == "B" and pos < len(tokens) and tokens[pos][0] == ",":
            pos += 1
            ids.append(ident())
        expect(")")
        return Leaf(tuple(ids))

    # explicit stack of open S/P frames: [kind, children]
    frames: list[list] = []
    tree = None
    while True:
        kind = expect("open")
        if kind in ("e", "B"):
            node = leaf(kind)
        else:
            frames.append([kind, []])
            continue
        while frames:
            frames[-1][1].append(node)
            if len(frames[-1][1]) == 1:
                expect(",")
                break
            expect(")")
            kind, (left, right) = frames.pop()
            node = (Series if kind == "S" else Parallel)(left, right)
        else:
            tree = node
        if tree is not None:
            break

    if pos != len(tokens):
        raise SPError(f"syntax error: trailing input {tokens[pos][1]!r}")
    if graph is None:
        return assign_terminals(tree)
    if source is None or sink is None:
        raise SPError("source and sink are required to resolve terminals")
    return resolve_terminals(tree, graph, source, sink)


def to_term(tree: SPTree) -> str:
    out = {}
    for node in postorder(tree):
        if isinstance(node, Leaf):
            if len(node.edges) == 1:
                out[id(node)] = f"e({node.edges[0]})"
            else:
                out[id(node)] = "B(" + ",".join(node.edges) + ")"
        else:
            tag = "S" if isinstance(node, Series) else "P"
            out[id(node)] = f"{tag}({out.pop(id(node.left))},{out.pop(id(node.right))})"
    return out[id(tree)]


def assign_terminals(tree: SPTree, source: str = "s", sink: str = "t") -> SPTree:
    """Give the tree synthetic terminals (``m1, m2, ...`` for midpoints)."""
    fresh = count(1)
    result = {}
    # top-down: (node, source, sink, slot) where slot records the parent
    stack = [(tree, source, sink)]
    order = []
    while stack:
        node, a, b = stack.pop()
        order.append((node, a, b))
        if isinstance(node, Series):
            mid = f"m{next(fresh)}"
            stack.append((node.right, mid, b))
            stack.append((node.left, a, mid))
        elif isinstance(node, Parallel):
            stack.append((node.right, a, b))
            stack.append((node.left, a, b))
    for node, a, b in reversed(order):
        if isinstance(node, Leaf):
            result[id(node)] = replace(node, source=a, sink=b)
        else:
            result[id(node)] = replace(node, left=result.pop(id(node.left)),
                                       right=result.pop(id(node.right)),
                                       source=a, sink=b)
    return result[id(tree)]


def resolve_terminals(tree: SPTree, graph: Multigraph, source: str, sink: str) -> SPTree:
    """Orient ``tree`` on ``graph`` from ``source`` to ``sink``.

    Series children are swapped when needed so that ``left`` always touches
    the node's source.
    """
    tree_edges = edge_ids(tree)
    if sorted(tree_edges) != sorted(graph.edge_ids()):
        raise SPError("tree edge ids do not match the graph's edge ids")
    pairs = {}
    for node in postorder(tree):
        if isinstance(node, Leaf):
            ends = {frozenset((graph.edge(e).u, graph.edge(e).v)) for e in node.edges}
            if len(ends) != 1:
                raise SPError(f"bundle {node.edges} mixes endpoint pairs")
            pairs[id(node)] = ends.pop()
        elif isinstance(node, Series):
            a, b = pairs[id(node.left)], pairs[id(node.right)]
            shared = a & b
            if len(shared) != 1:
                raise SPError("terminal mismatch: series children must share exactly one node")
            pairs[id(node)] = (a | b) - shared
        else:
            if pairs[id(node.left)] != pairs[id(node.right)]:
                raise SPError("terminal mismatch: parallel children must share both terminals")
            pairs[id(node)] = pairs[id(node.left)]
    if pairs[id(tree)] != frozenset((source, sink)):
        raise SPError("terminal mismatch: root does not span source and sink")

    order = []
    stack = [(tree, source)]
    while stack:
        node, a = stack.pop()
        (b,) = pairs[id(node)] - {a}
        if isinstance(node, Series):
            first, second = node.left, node.right
            if a not in pairs[id(first)]:
                first, second = second, first
            (mid,) = pairs[id(first)] - {a}
            order.append((node, a, b, first, second))
            stack.append((second, mid))
            stack.append((first, a))
        elif isinstance(node, Parallel):
            order.append((node, a, b, node.left, node.right))
            stack.append((node.right, a))
            stack.append((node.left, a))
        else:
            order.append((node, a, b, None, None))
    built = {}
    for node, a, b, first, second in reversed(order):
        if isinstance(node, Leaf):
            built[id(node)] = Leaf(node.edges, a, b)
        else:
            built[id(node)] = type(node)(built.pop(id(first)), built.pop(id(second)), a, b)
    return built[id(tree)]


def flatten(tree: SPTree) -> Multigraph:
    """The multigraph a tree with terminals describes."""
    nodes = []
    seen = set()
    edges = []
    for leaf in leaves(tree):
        if leaf.source is None or leaf.sink is None:
            raise SPError("tree has no terminals; call assign_terminals first")
        for x in (leaf.source, leaf.sink):
            if x not in seen:
                seen.add(x)
                nodes.append(x)
        edges.extend(Edge(e, leaf.source, leaf.sink) for e in leaf.edges)
    return Multigraph(tuple(nodes), tuple(edges))


# -- recognition --------------------------------------------------------------

def recognize(graph: Multigraph, source: str, sink: str) -> SPTree:
    """Parse tree of a two-terminal series-parallel multigraph.

    Repeatedly merges parallel super-edges and contracts inner degree-2
    nodes.  Raises :class:`NotSeriesParallel` when neither rule applies
    before a single source-sink super-edge remains.
    """
    if source == sink:
        raise NotSeriesParallel("source equals sink")
    if not graph.edges:
        raise NotSeriesParallel("graph has no edges")
    ends: dict[int, tuple[str, str]] = {}
    trees: dict[int, SPTree] = {}
    adj: dict[str, set[int]] = defaultdict(set)
    by_pair: dict[frozenset, set[int]] = defaultdict(set)
    ids = count()

    def add(a, b, tree):
        k = next(ids)
        ends[k] = (a, b)
        trees[k] = tree
        adj[a].add(k)
        adj[b].add(k)
        by_pair[frozenset((a, b))].add(k)
        return k

    def remove(k):
        a, b = ends.pop(k)
        adj[a].discard(k)
        adj[b].discard(k)
        by_pair[frozenset((a, b))].discard(k)
        return a, b, trees.pop(k)

    for e in graph.edges:
        add(e.u, e.v, Leaf((e.id,)))
    for x in (source, sink):
        if x not in adj:
            raise NotSeriesParallel(f"terminal {x!r} has no incident edge")

    pair_work = [p for p, ks in by_pair.items() if len(ks) > 1]
    node_work = [x for x in adj if len(adj[x]) == 2 and x not in (source, sink)]
    while pair_work or node_work:
        if pair_work:
            pair = pair_work.pop()
            ks = sorted(by_pair[pair])
            if len(ks) < 2:
                continue
            merged = None
            a, b = ends[ks[0]]
            for k in ks:
                _, _, t = remove(k)
                if merged is None:
                    merged = t
                elif isinstance(merged, Leaf) and isinstance(t, Leaf):
                    merged = Leaf(merged.edges + t.edges)
                else:
                    merged = Parallel(merged, t)
            add(a, b, merged)
            for x in (a, b):
                if len(adj[x]) == 2 and x not in (source, sink):
                    node_work.append(x)
            continue
        x = node_work.pop()
        if len(adj[x]) != 2 or x in (source, sink):
            continue
        k1, k2 = sorted(adj[x])
        a1, b1, t1 = remove(k1)
        a2, b2, t2 = remove(k2)
        left = a1 if b1 == x else b1
        right = a2 if b2 == x else b2
        k = add(left, right, Series(t1, t2))
        if len(by_pair[frozenset((left, right))]) > 1:
            pair_work.append(frozenset((left, right)))
    live = list(ends)
    if len(live) != 1 or frozenset(ends[live[0]]) != frozenset((source, sink)):
        raise NotSeriesParallel(
            f"reduction stuck with {len(live)} super-edges; graph is not "
            f"two-terminal series-parallel between {source!r} and {sink!r}"
        )
    return resolve_terminals(trees[live[0]], graph, source, sink)


def normalize(tree: SPTree) -> SPTree:
    """Collapse every maximal parallel group of leaves into one bundle."""

    def fn(node, kids):
        if isinstance(node, Leaf):
            return node
        if isinstance(node, Series):
            return Series(kids[0], kids[1], node.source, node.sink)
        members = []
        for k in kids:
            if isinstance(k, Parallel):
                members.extend((k.left, k.right))
            else:
                members.append(k)
        bundle = tuple(e for k in members if isinstance(k, Leaf) for e in k.edges)
        others = [k for k in members if not isinstance(k, Leaf)]
        parts = ([Leaf(bundle, node.source, node.sink)] if bundle else []) + others
        out = parts[0]
        for p in parts[1:]:
            out = Parallel(out, p, node.source, node.sink)
        return out

    return _rebuild(tree, fn)


# -- annotation ---------------------------------------------------------------

@dataclass
class AnnotatedTree:
    """A tree plus, per node, the players crossing it and their untolled
    within-node costs under a state."""

    tree: SPTree
    game: Game
    state: dict[int, tuple[str, ...]]
    loads: dict[str, int]
    players: dict[int, frozenset] = field(default_factory=dict)
    on_edge: dict[str, list] = field(default_factory=dict)
    costs: dict[int, dict[int, Fraction]] = field(default_factory=dict)

    def node_players(self, node: SPTree) -> frozenset:
        return self.players[id(node)]

    def node_costs(self, node: SPTree) -> dict[int, Fraction]:
        return self.costs[id(node)]

    def cmax(self, node: SPTree) -> Fraction:
        """Highest within-node cost of a crossing player, 0 if none."""
        return max(self.costs[id(node)].values(), default=Fraction(0))

    def l(self, edge: str) -> Fraction | None:
        n = self.loads.get(edge, 0)
        return self.game.cost(edge, n) if n else None

    def l_plus(self, edge: str) -> Fraction:
        return self.game.cost(edge, self.loads.get(edge, 0) + 1)


def symmetric_terminals(game: Game) -> tuple[str, str]:
    if not game.is_symmetric():
        raise NotSymmetric("the game is not symmetric")
    p = game.players[0]
    return p.source, p.sink


def annotate(tree: SPTree, game: Game, state: State) -> AnnotatedTree:
    """Map a state of a symmetric game onto the tree, bottom-up."""
    symmetric_terminals(game)
    if sorted(edge_ids(tree)) != sorted(game.graph.edge_ids()):
        raise SPError("tree edges differ from the game's edges")
    state = check_state(game, state)
    n = loads(game, state)
    on_edge = defaultdict(list)
    for pid, path in state.items():
        for e in path:
            on_edge[e].append(pid)
    ann = AnnotatedTree(tree, game, state, {e: n[e] for e in game.graph.edge_ids()},
                        on_edge=dict(on_edge))
    for node in postorder(tree):
        if isinstance(node, Leaf):
            costs = {}
            for e in node.edges:
                for pid in on_edge[e]:
                    if pid in costs:
                        raise SPError(f"player {pid} uses two links of bundle {node.edges}")
                    costs[pid] = game.cost(e, n[e])
            ann.costs[id(node)] = costs
            ann.players[id(node)] = frozenset(costs)
            continue
        left, right = ann.players[id(node.left)], ann.players[id(node.right)]
        lc, rc = ann.costs[id(node.left)], ann.costs[id(node.right)]
        if isinstance(node, Series):
            if left != right:
                raise SPError("a player path is not decomposable over a series node")
            ann.costs[id(node)] = {pid: lc[pid] + rc[pid] for pid in left}
            ann.players[id(node)] = left
        else:
            if left & right:
                raise SPError("a player path enters both branches of a parallel node")
            ann.costs[id(node)] = {**lc, **rc}
            ann.players[id(node)] = left | right
    if ann.players[id(tree)] != frozenset(state):
        raise SPError("some player does not cross the root")
    return ann
