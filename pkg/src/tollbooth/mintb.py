"""Minimum tollbooths on series-parallel networks.

Bottom-up, every tree node gets a tollability list: entries ``(eta, lam)``
meaning that with ``eta`` tolled edges inside the node the state stays
implemented there and a newcomer can be charged at least ``lam``; ``lambda0``
is the lowest such newcomer cost compatible with the state.  Top-down,
:func:`place_tolls` turns the root's first entry into concrete tolls.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .game import INF, Game, State, is_pne
from .spgraph import (
    AnnotatedTree,
    Leaf,
    Parallel,
    Series,
    SPTree,
    annotate,
    postorder,
    recognize,
    symmetric_terminals,
)

log = logging.getLogger(__name__)


class ListInvariantError(AssertionError):
    """A tollability list or a placement broke its invariants."""


@dataclass(frozen=True)
class TollabilityEntry:
    eta: int
    lam: Fraction | float
    idx_v: int | None = None
    idx_w: int | None = None


@dataclass(frozen=True)
class TollabilityList:
    lambda0: Fraction
    entries: tuple[TollabilityEntry, ...]

    @property
    def eta_min(self) -> int:
        return self.entries[0].eta

    @property
    def eta_max(self) -> int:
        return self.entries[-1].eta

    def first_reaching(self, cost) -> int:
        """Index of the first entry with ``lam >= cost``."""
        for i, entry in enumerate(self.entries):
            if entry.lam >= cost:
                return i
        raise ListInvariantError(f"no entry reaches cost {cost}")

    def pairs(self) -> list[tuple[int, Fraction | float]]:
        return [(x.eta, x.lam) for x in self.entries]


def check_list(lst: TollabilityList) -> None:
    """Assert consecutive etas, nondecreasing lambdas, a terminal infinity
    and ``lam(first) >= lambda0``."""
    es = lst.entries
    if not es:
        raise ListInvariantError("empty list")
    if lst.lambda0 == INF or lst.lambda0 < 0:
        raise ListInvariantError(f"bad lambda0 {lst.lambda0}")
    for a, b in zip(es, es[1:]):
        if b.eta != a.eta + 1:
            raise ListInvariantError(f"etas not consecutive: {a.eta}, {b.eta}")
        if b.lam < a.lam:
            raise ListInvariantError(f"lambda decreases at eta {b.eta}")
    if es[-1].lam != INF or any(e.lam == INF for e in es[:-1]):
        raise ListInvariantError("infinity must appear exactly at the last entry")
    if es[0].lam < lst.lambda0:
        raise ListInvariantError("first lambda below lambda0")


def leaf_list(costs: Sequence[Sequence[Fraction]], loads: Sequence[int]) -> TollabilityList:
    """List of a parallel-link bundle.

    ``costs[i]`` is the table ``c(1..n+1)`` of link ``i`` and ``loads[i]`` its
    load in the state.  Only used links count towards the highest player
    cost; an unused bundle has no implementation constraint.
    """
    if not costs:
        raise ValueError("empty bundle")
    if len(costs) != len(loads):
        raise ValueError("one load per link is required")
    l_plus = sorted(Fraction(c[n]) for c, n in zip(costs, loads))
    used = [Fraction(c[n - 1]) for c, n in zip(costs, loads) if n >= 1]
    l_max = max(used, default=Fraction(0))
    eta_min = sum(1 for x in l_plus if x < l_max)
    eta_max = len(l_plus)
    lambda0 = max(l_max, l_plus[0])
    entries = tuple(
        TollabilityEntry(eta, l_plus[eta] if eta < eta_max else INF)
        for eta in range(eta_min, eta_max + 1)
    )
    return TollabilityList(lambda0, entries)


def compose_series(lv: TollabilityList, lw: TollabilityList) -> TollabilityList:
    """Series composition: newcomer costs add up."""
    first = lv.eta_min + lw.eta_min
    last = min(lv.eta_min + lw.eta_max, lv.eta_max + lw.eta_min)
    best = {}
    for a, ea in enumerate(lv.entries):
        for b, eb in enumerate(lw.entries):
            eta = ea.eta + eb.eta
            if eta > last:
                break
            lam = ea.lam + eb.lam
            # strict > keeps the pair with the smallest left index
            if eta not in best or lam > best[eta][0]:
                best[eta] = (lam, a, b)
    entries = tuple(
        TollabilityEntry(eta, *best[eta]) for eta in range(first, last + 1)
    )
    return TollabilityList(lv.lambda0 + lw.lambda0, entries)


def compose_parallel(lv: TollabilityList, lw: TollabilityList, c_v, c_w) -> TollabilityList:
    """Parallel composition.

    ``c_v`` and ``c_w`` are the highest player costs inside each branch (0
    when unused).  A branch must charge newcomers at least the other
    branch's highest cost, so only entries reaching that bound take part.
    """
    c_v, c_w = Fraction(c_v), Fraction(c_w)
    a0 = lv.first_reaching(c_w)
    b0 = lw.first_reaching(c_v)
    first = lv.entries[a0].eta + lw.entries[b0].eta
    last = lv.eta_max + lw.eta_max
    best = {}
    for a in range(a0, len(lv.entries)):
        ea = lv.entries[a]
        for b in range(b0, len(lw.entries)):
            eb = lw.entries[b]
            eta = ea.eta + eb.eta
            lam = min(ea.lam, eb.lam)
            if eta not in best or lam > best[eta][0]:
                best[eta] = (lam, a, b)
    entries = tuple(
        TollabilityEntry(eta, *best[eta]) for eta in range(first, last + 1)
    )
    lambda0 = max(c_v, c_w, min(lv.lambda0, lw.lambda0))
    return TollabilityList(lambda0, entries)


def build_lists(ann: AnnotatedTree, check: bool = False,
                tolled: bool = True) -> dict[int, TollabilityList]:
    """Tollability list of every node, keyed by ``id(node)``.

    At a parallel node each branch must charge newcomers at least the
    highest cost a player pays in the other branch.  With ``tolled`` (the
    default) that cost includes the tolls the branch itself receives when
    placed at its own ``lambda0``; tolls on used links raise it above the
    untolled maximum.  ``tolled=False`` uses untolled costs, which can
    yield tolls that leave an improving deviation.
    """
    lists = {}
    mu = {}
    game = ann.game
    for node in postorder(ann.tree):
        if isinstance(node, Leaf):
            lst = leaf_list(
                [game.costs[e] for e in node.edges],
                [ann.loads.get(e, 0) for e in node.edges],
            )
        elif isinstance(node, Series):
            lst = compose_series(lists[id(node.left)], lists[id(node.right)])
        else:
            if tolled:
                cv, cw = mu[id(node.left)], mu[id(node.right)]
            else:
                cv, cw = ann.cmax(node.left), ann.cmax(node.right)
            lst = compose_parallel(lists[id(node.left)], lists[id(node.right)], cv, cw)
        if check:
            check_list(lst)
        lists[id(node)] = lst
        if tolled:
            costs = {}
            place_tolls(ann, lists, node, lst.lambda0, {}, costs)
            mu[id(node)] = max(costs.values(), default=Fraction(0))
    return lists


def split_series(lv: TollabilityList, lw: TollabilityList, entry: TollabilityEntry, c_in):
    """Divide ``c_in`` between the two halves of a series node."""
    lam_k = lw.entries[entry.idx_w].lam
    c_w = min(lam_k, c_in - lv.lambda0)
    c_v = c_in - c_w
    return c_v, c_w


def place_tolls(ann: AnnotatedTree, lists: dict[int, TollabilityList], node: SPTree,
                c_in, out: dict, player_costs: dict | None = None) -> None:
    """Write tolls into ``out`` so that ``node`` charges newcomers ``c_in``.

    When ``player_costs`` is given, the tolled within-node cost of every
    player crossing ``node`` is accumulated into it.
    """
    stack = [(node, c_in)]
    while stack:
        r, c = stack.pop()
        if c == INF:
            raise ListInvariantError("infinite cost pushed down the tree")
        lst = lists[id(r)]
        if c < lst.lambda0:
            raise ListInvariantError(f"cost {c} below lambda0 {lst.lambda0}")
        if isinstance(r, Leaf):
            for e in r.edges:
                lp = ann.l_plus(e)
                toll = c - lp if lp < c else 0
                if toll:
                    out[e] = toll
                if player_costs is not None and ann.loads.get(e):
                    for pid in ann.on_edge[e]:
                        player_costs[pid] = player_costs.get(pid, 0) + ann.l(e) + toll
            continue
        entry = lst.entries[lst.first_reaching(c)]
        lv, lw = lists[id(r.left)], lists[id(r.right)]
        if isinstance(r, Series):
            c_v, c_w = split_series(lv, lw, entry, c)
            j, k = entry.idx_v, entry.idx_w
            if not (c_v >= lv.lambda0 and c_w >= lw.lambda0
                    and (j == 0 or c_v > lv.entries[j - 1].lam)
                    and (k == 0 or c_w > lw.entries[k - 1].lam)
                    and c_v <= lv.entries[j].lam and c_w <= lw.entries[k].lam):
                raise ListInvariantError("series split violates its constraints")
        else:
            c_v = max(c, lv.lambda0)
            c_w = max(c, lw.lambda0)
        stack.append((r.right, c_w))
        stack.append((r.left, c_v))


def _tree_for(game: Game, tree: SPTree | None) -> SPTree:
    source, sink = symmetric_terminals(game)
    if tree is None:
        return recognize(game.graph, source, sink)
    return tree


def implement(game: Game, state: State, tree: SPTree | None = None):
    """Tolls from the list recursion, without the final equilibrium check.

    Returns ``(tolls, lists, annotated_tree)``.
    """
    tree = _tree_for(game, tree)
    ann = annotate(tree, game, state)
    lists = build_lists(ann)
    tolls: dict = {}
    place_tolls(ann, lists, tree, lists[id(tree)].lambda0, tolls)
    return tolls, lists, ann


@dataclass
class Solution:
    tolls: dict
    count: int
    lambda0: Fraction
    tree: SPTree
    lists: dict[int, TollabilityList]
    annotated: AnnotatedTree


def run(game: Game, state: State, tree: SPTree | None = None, check: bool = False,
        certify: bool = True) -> Solution:
    """Full solver output: tolls, count, root ``lambda0`` and every list."""
    tree = _tree_for(game, tree)
    ann = annotate(tree, game, state)
    lists = build_lists(ann, check=check)
    root = lists[id(tree)]
    tolls: dict = {}
    place_tolls(ann, lists, tree, root.lambda0, tolls)
    count = root.entries[root.first_reaching(root.lambda0)].eta
    if len(tolls) != count:
        raise ListInvariantError(f"placed {len(tolls)} tolls, list promised {count}")
    if certify:
        ok, witness = is_pne(game, tolls, state)
        if not ok:
            raise ListInvariantError(f"placed tolls leave an improving deviation {witness}")
    return Solution(tolls, count, root.lambda0, tree, lists, ann)


def solve(game: Game, state: State, tree: SPTree | None = None, check: bool = False):
    """Minimum-support tolls implementing ``state`` on a symmetric
    series-parallel game.

    Returns ``(tolls, count)``.  ``tree`` may be supplied as a parse tree of
    the game's graph; otherwise it is recognized.  The result is certified
    with a best-response check before it is returned.
    """
    sol = run(game, state, tree, check=check)
    return sol.tolls, sol.count
