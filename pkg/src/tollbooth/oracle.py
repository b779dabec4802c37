"""Brute-force ground truth for small games.

Everything here enumerates: simple paths, states, edge subsets.  Toll
feasibility for a fixed support is decided exactly by a rational simplex.
Nothing in this module reuses the shortest-path or series-parallel
machinery it is meant to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .game import Game, GameError, State, check_state, loads


class BudgetExceeded(RuntimeError):
    """A configured search budget ran out.  ``best`` holds the best result
    found so far, if any."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NotImplementable(GameError):
    """No toll vector at all makes the state an equilibrium."""


@dataclass(frozen=True)
class Budget:
    max_states: int = 2_000_000
    max_subset_size: int = 6
    max_paths: int = 20_000


DEFAULT_BUDGET = Budget()


def enum_paths(game: Game, player: int, cost_cap=None, budget: Budget = DEFAULT_BUDGET) -> list[tuple[str, ...]]:
    """All simple source-sink paths of ``player`` in lexicographic order of
    edge ids.

    With ``cost_cap``, partial paths whose single-user cost already exceeds
    the cap are dropped.
    """
    p = game.player(player)
    graph = game.graph
    out = []
    incident = {x: sorted(graph.incident(x), key=lambda e: e.id) for x in graph.nodes}
    path: list[str] = []
    on_path = {p.source}

    def dfs(node, cost):
        if node == p.sink:
            out.append(tuple(path))
            if len(out) > budget.max_paths:
                raise BudgetExceeded(f"more than {budget.max_paths} paths for player {player}")
            return
        for e in incident[node]:
            nxt = e.other(node)
            if nxt in on_path:
                continue
            c = cost + game.cost(e.id, 1)
            if cost_cap is not None and c > cost_cap:
                continue
            on_path.add(nxt)
            path.append(e.id)
            dfs(nxt, c)
            path.pop()
            on_path.discard(nxt)

    dfs(p.source, Fraction(0))
    return out


def _deviation_cost(game: Game, n, own: set, path, tolls) -> Fraction:
    total = Fraction(0)
    for e in path:
        load = n[e] if e in own else n[e] + 1
        total += game.cost(e, load) + tolls.get(e, 0)
    return total


def pne_exhaustive(game: Game, tolls, state: State, budget: Budget = DEFAULT_BUDGET) -> bool:
    """Definition-level PNE check against every simple alternative path."""
    tolls = tolls or {}
    state = check_state(game, state)
    n = loads(game, state)
    for p in game.players:
        own = set(state[p.id])
        current = sum((game.cost(e, n[e]) + tolls.get(e, 0) for e in state[p.id]), Fraction(0))
        for path in enum_paths(game, p.id, budget=budget):
            if _deviation_cost(game, n, own, path, tolls) < current:
                return False
    return True


def social_optimum(game: Game, incumbent: State | None = None, budget: Budget = DEFAULT_BUDGET):
    """Minimum social cost state by branch and bound over path choices.

    Returns ``(state, cost)``.  Players are assigned in id order; each
    player's paths are tried in lexicographic order, and only strictly better
    complete states replace the incumbent.
    """
    players = [p.id for p in game.players]
    options = {pid: enum_paths(game, pid, budget=budget) for pid in players}
    solo = {
        pid: min(sum((game.cost(e, 1) for e in path), Fraction(0)) for path in options[pid])
        for pid in players
    }
    # suffix lower bounds on what the unassigned players pay at least
    rest = [Fraction(0)] * (len(players) + 1)
    for i in range(len(players) - 1, -1, -1):
        rest[i] = rest[i + 1] + solo[players[i]]

    best_state = None
    best_cost = None
    if incumbent is not None:
        best_state = check_state(game, incumbent)
        n = loads(game, best_state)
        best_cost = sum((n[e] * game.cost(e, n[e]) for e in n), Fraction(0))

    counts: dict[str, int] = {}
    chosen: list[tuple[str, ...]] = []
    visited = 0

    def partial_cost():
        return sum((k * game.cost(e, k) for e, k in counts.items() if k), Fraction(0))

    def search(i):
        nonlocal best_state, best_cost, visited
        visited += 1
        if visited > budget.max_states:
            raise BudgetExceeded(
                f"social optimum search exceeded {budget.max_states} nodes",
                best=(best_state, best_cost),
            )
        lower = partial_cost() + rest[i]
        if best_cost is not None and lower >= best_cost:
            return
        if i == len(players):
            best_cost = lower
            best_state = dict(zip(players, chosen))
            return
        for path in options[players[i]]:
            for e in path:
                counts[e] = counts.get(e, 0) + 1
            chosen.append(path)
            search(i + 1)
            chosen.pop()
            for e in path:
                counts[e] -= 1

    search(0)
    return best_state, best_cost


# -- exact feasibility --------------------------------------------------------

def _normalize(coefs: tuple, rhs: Fraction):
    """Scale so that the first nonzero coefficient has absolute value 1."""
    for c in coefs:
        if c:
            s = abs(c)
            return tuple(x / s for x in coefs), rhs / s
    return coefs, rhs


def _prune(rows):
    """Drop duplicates and rows dominated by a tighter right-hand side."""
    tight = {}
    for coefs, rhs in rows:
        coefs, rhs = _normalize(coefs, rhs)
        if coefs not in tight or rhs < tight[coefs]:
            tight[coefs] = rhs
    return list(tight.items())


def _pivot(tab, basis, r, c):
    row = tab[r]
    p = row[c]
    tab[r] = row = [x / p for x in row]
    for i, other in enumerate(tab):
        if i != r and other[c]:
            f = other[c]
            tab[i] = [x - f * y for x, y in zip(other, row)]
    basis[r] = c


def _simplex(tab, basis, ncols):
    """Minimize the objective held in the last tableau row (Bland's rule)."""
    obj = tab[-1]
    while True:
        obj = tab[-1]
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return
        best = None
        for i in range(len(tab) - 1):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise AssertionError("unbounded toll program")
        _pivot(tab, basis, best[1], enter)


def lp_min_sum(rows, nvars: int):
    """Solve ``min sum(x)`` subject to ``A x <= b, x >= 0`` exactly.

    ``rows`` are ``(coefficient tuple, rhs)`` pairs.  Returns an optimal
    point as a list of Fractions, or ``None`` when infeasible.  Dense
    two-phase simplex over Fractions.
    """
    rows = [(tuple(Fraction(c) for c in co), Fraction(r)) for co, r in rows]
    cleaned = []
    for coefs, rhs in _prune(rows):
        if not any(coefs):
            if rhs < 0:
                return None
            continue
        cleaned.append((coefs, rhs))
    m = len(cleaned)
    if m == 0:
        return [Fraction(0)] * nvars
    # columns: x (nvars), slack (m), artificial (m), rhs
    width = nvars + 2 * m + 1
    tab = []
    basis = []
    for i, (coefs, rhs) in enumerate(cleaned):
        row = [Fraction(0)] * width
        sign = -1 if rhs < 0 else 1
        for j, a in enumerate(coefs):
            row[j] = sign * a
        row[nvars + i] = Fraction(sign)
        row[nvars + m + i] = Fraction(1)
        row[-1] = sign * rhs
        tab.append(row)
        basis.append(nvars + m + i)
    phase1 = [Fraction(0)] * width
    for row in tab:
        phase1 = [x - y for x, y in zip(phase1, row)]
    for i in range(m):
        phase1[nvars + m + i] = Fraction(0)
    tab.append(phase1)
    _simplex(tab, basis, nvars + 2 * m)
    if tab[-1][-1] != 0:
        return None
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= nvars + m:
            col = next((j for j in range(nvars + m) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)
    keep = [i for i in range(m) if basis[i] < nvars + m]
    tab = [tab[i][:nvars + m] + [tab[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    obj = [Fraction(1)] * nvars + [Fraction(0)] * (m + 1)
    for row, b in zip(tab, basis):
        if obj[b]:
            f = obj[b]
            obj = [x - f * y for x, y in zip(obj, row)]
    tab.append(obj)
    _simplex(tab, basis, nvars + m)
    values = [Fraction(0)] * nvars
    for row, b in zip(tab, basis):
        if b < nvars:
            values[b] = row[-1]
    return values


class _Deviations:
    """All PNE inequalities of a state, built once per (game, state)."""

    def __init__(self, game: Game, state: State, budget: Budget):
        state = check_state(game, state)
        n = loads(game, state)
        self.rows = []  # (plus edges, minus edges, rhs): sum(plus) - sum(minus) <= rhs
        for p in game.players:
            own = set(state[p.id])
            current = sum((game.cost(e, n[e]) for e in state[p.id]), Fraction(0))
            for path in enum_paths(game, p.id, budget=budget):
                alt = set(path)
                if alt == own:
                    continue
                rhs = _deviation_cost(game, n, own, path, {}) - current
                self.rows.append((frozenset(own - alt), frozenset(alt - own), rhs))
        self.violated = [r for r in self.rows if r[2] < 0]

    def could_fix(self, subset: frozenset) -> bool:
        # every currently violated row needs a tolled edge on the deviation
        return all(minus & subset for _, minus, _ in self.violated)

    def system(self, subset: Sequence[str]):
        index = {e: i for i, e in enumerate(subset)}
        rows = []
        for plus, minus, rhs in self.rows:
            coefs = [Fraction(0)] * len(subset)
            for e in plus:
                if e in index:
                    coefs[index[e]] += 1
            for e in minus:
                if e in index:
                    coefs[index[e]] -= 1
            rows.append((tuple(coefs), rhs))
        return rows


def toll_feasible(game: Game, state: State, subset, budget: Budget = DEFAULT_BUDGET, _dev=None):
    """Tolls supported on ``subset`` that make ``state`` a PNE, or ``None``.

    Among feasible vectors the one with least total toll is returned.
    """
    dev = _dev or _Deviations(game, state, budget)
    subset = sorted(subset)
    if not dev.could_fix(frozenset(subset)):
        return None
    if not subset:
        return {}
    sol = lp_min_sum(dev.system(subset), len(subset))
    if sol is None:
        return None
    return {e: v for e, v in zip(subset, sol) if v > 0}


def min_tollbooths(game: Game, state: State, budget: Budget = DEFAULT_BUDGET):
    """Exact minimum number of tolled edges implementing ``state``.

    Returns ``(count, tolls, support)`` where ``support`` is the
    lexicographically first minimum subset.  Raises
    :class:`NotImplementable` when even tolling every edge fails, which
    can happen once players have different terminals.  The subset budget
    may run out before that point is reached.
    """
    dev = _Deviations(game, state, budget)
    edges = sorted(game.graph.edge_ids())
    for size in range(0, len(edges) + 1):
        if size > budget.max_subset_size:
            raise BudgetExceeded(f"no implementation with at most {budget.max_subset_size} tolls")
        for subset in combinations(edges, size):
            tolls = toll_feasible(game, state, subset, budget, _dev=dev)
            if tolls is not None:
                return size, tolls, tuple(subset)
    raise NotImplementable("no toll vector implements this state")
