"""Gadget games built from CNF formulas.

A formula with ``n`` variables, ``m`` clauses and ``L`` literal occurrences
becomes a game with three player roles:

* clause players ``s -> c_j``;
* occurrence players ``o -> c_j``, one per literal occurrence;
* variable players ``v0 -> v1``, one per variable.

Stage ``g1`` has only the clause players, ``g2`` adds the occurrence
players and their edges, and ``g3`` adds the variable players with one
``2x`` edge per variable.

Per variable ``x`` and polarity ``b`` there is a grid of rows, one per
occurrence of the literal.  Each row is a chain ``l-r-l-r-...-r`` with one
column per occurrence of the opposite literal, closed by ``z`` and an edge
to the clause.  An occurrence player either goes straight through its
``z`` node, or, when a clause player already holds that ``z -> c`` edge,
takes the corridor: one column of every row of the opposite grid, leaving
through an exit edge into its clause.

Identifiers (``x`` is ``x<i>``, ``b`` is ``0``/``1``)::

    nodes  s  v:x  v0:x  v1:x  l:x:b:j:k  r:x:b:j:k  z:x:b:j  o:x:b:j  c:j
    edges  sv:x  vv0:x  vv1:x  v0v1:x
           vl:x:b:j  lr:x:b:j:k  rl:x:b:j:k  rz:x:b:j  zc:x:b:j
           oz:x:b:j  ol:x:b:j  rd:x:b:j:k  rc:x:b:k

``rl`` joins column ``k`` to ``k+1`` within a row, ``rd`` joins row ``j``
to ``j+1`` within a column and ``rc`` leaves the last row of column ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .game import Game, GameError, State, check_state, loads, make_game
from .oracle import DEFAULT_BUDGET, Budget, min_tollbooths

STAGES = ("g1", "g2", "g3")


class FormulaError(ValueError):
    """Malformed DIMACS text or an invalid formula."""


@dataclass(frozen=True)
class CnfFormula:
    """Clauses hold nonzero DIMACS literals: ``i`` for ``x_i``, ``-i`` for
    its negation."""

    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vars < 1:
            raise FormulaError("a formula needs at least one variable")
        if not self.clauses:
            raise FormulaError("a formula needs at least one clause")
        fixed = []
        for j, clause in enumerate(self.clauses, 1):
            clause = tuple(int(x) for x in clause)
            if not clause:
                raise FormulaError(f"clause {j} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise FormulaError(f"clause {j}: literal {lit} out of range")
            if len({abs(x) for x in clause}) != len(clause):
                raise FormulaError(f"clause {j} mentions a variable twice")
            fixed.append(clause)
        object.__setattr__(self, "clauses", tuple(fixed))

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return all(any(_true(lit, assignment) for lit in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {self.n_clauses}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def _true(lit: int, assignment: Sequence[int]) -> bool:
    value = assignment[abs(lit) - 1]
    return value == 1 if lit > 0 else value == 0


def parse_dimacs(text: str) -> CnfFormula:
    header = None
    clauses = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise FormulaError(f"line {lineno}: bad header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise FormulaError(f"line {lineno}: bad header {line!r}") from None
            continue
        if header is None:
            raise FormulaError(f"line {lineno}: clause before the 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormulaError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise FormulaError(f"line {lineno}: empty clause")
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise FormulaError("missing 'p cnf' header")
    if current:
        raise FormulaError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise FormulaError(f"header announces {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


@dataclass(frozen=True)
class OccurrenceStats:
    """``neg[i-1]``/``pos[i-1]`` count the occurrences of ``x_i``;
    ``clauses[(i, b)]`` lists, ascending, the clauses holding the literal."""

    neg: tuple[int, ...]
    pos: tuple[int, ...]
    clauses: Mapping[tuple[int, int], tuple[int, ...]]

    @property
    def total(self) -> int:
        return sum(self.neg) + sum(self.pos)

    def count(self, var: int, polarity: int) -> int:
        return (self.pos if polarity else self.neg)[var - 1]

    def per_var(self, var: int) -> int:
        return self.neg[var - 1] + self.pos[var - 1]


def occurrence_stats(formula: CnfFormula) -> OccurrenceStats:
    occ = {(i, b): [] for i in range(1, formula.n_vars + 1) for b in (0, 1)}
    for j, clause in enumerate(formula.clauses, 1):
        for lit in clause:
            occ[(abs(lit), int(lit > 0))].append(j)
    return OccurrenceStats(
        neg=tuple(len(occ[(i, 0)]) for i in range(1, formula.n_vars + 1)),
        pos=tuple(len(occ[(i, 1)]) for i in range(1, formula.n_vars + 1)),
        clauses={k: tuple(v) for k, v in occ.items()},
    )


def big_m(formula: CnfFormula, n_edges: int) -> int:
    """Finite stand-in for an unaffordable cost: above any path made of
    finite-cost edges, whatever the loads."""
    players = formula.n_clauses + occurrence_stats(formula).total + formula.n_vars
    return 1 + n_edges * (7 + 2 * players)


@dataclass(frozen=True)
class GadgetGame:
    game: Game
    formula: CnfFormula
    stage: str
    big_m: int
    node_roles: Mapping[str, dict] = field(repr=False)
    player_roles: Mapping[int, dict] = field(repr=False)
    edge_roles: Mapping[str, dict] = field(repr=False)

    def roles_obj(self) -> dict:
        return {
            "node_roles": {k: dict(v) for k, v in self.node_roles.items()},
            "player_roles": {str(k): dict(v) for k, v in self.player_roles.items()},
        }

    def players_with(self, role: str) -> list[int]:
        return [pid for pid, r in self.player_roles.items() if r["role"] == role]


def _grid_shape(stats: OccurrenceStats, var: int, b: int, stage: str):
    """``(rows, cols, padded)`` of the grid of literal ``(var, b)``."""
    own, other = stats.count(var, b), stats.count(var, 1 - b)
    cols = max(1, other)
    if own:
        return own, cols, False
    if stage != "g1" and other:
        # corridor row for the opposite occurrence players
        return 1, cols, True
    return 0, cols, False


def build_game(formula: CnfFormula, stage: str = "g3") -> GadgetGame:
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}")
    stats = occurrence_stats(formula)
    nodes: list[str] = ["s"]
    node_roles: dict[str, dict] = {"s": {"kind": "s"}}
    # (id, u, v, kind) where kind picks the cost table
    edges: list[tuple[str, str, str, str]] = []
    edge_roles: dict[str, dict] = {}

    def node(name, **role):
        nodes.append(name)
        node_roles[name] = role

    def edge(eid, u, v, kind, **role):
        edges.append((eid, u, v, kind))
        edge_roles[eid] = {"cost": kind, **role}

    for i in range(1, formula.n_vars + 1):
        x = f"x{i}"
        node(f"v:{x}", kind="v", var=i)
        node(f"v0:{x}", kind="v0", var=i)
        node(f"v1:{x}", kind="v1", var=i)
        edge(f"sv:{x}", "s", f"v:{x}", "const0", var=i)
        edge(f"vv0:{x}", f"v:{x}", f"v0:{x}", "const2", var=i)
        edge(f"vv1:{x}", f"v:{x}", f"v1:{x}", "const7", var=i)
        if stage == "g3":
            edge(f"v0v1:{x}", f"v0:{x}", f"v1:{x}", "linear2", var=i)
        for b in (0, 1):
            rows, cols, padded = _grid_shape(stats, i, b, stage)
            lits = stats.clauses[(i, b)]
            for j in range(1, rows + 1):
                for k in range(1, cols + 1):
                    node(f"l:{x}:{b}:{j}:{k}", kind="l", var=i, polarity=b, row=j, col=k)
                    node(f"r:{x}:{b}:{j}:{k}", kind="r", var=i, polarity=b, row=j, col=k)
                    edge(f"lr:{x}:{b}:{j}:{k}", f"l:{x}:{b}:{j}:{k}", f"r:{x}:{b}:{j}:{k}",
                         "zero", var=i, polarity=b, row=j, col=k)
                    if k > 1:
                        edge(f"rl:{x}:{b}:{j}:{k - 1}", f"r:{x}:{b}:{j}:{k - 1}",
                             f"l:{x}:{b}:{j}:{k}", "zero", var=i, polarity=b, row=j, col=k - 1)
                if padded:
                    continue
                node(f"z:{x}:{b}:{j}", kind="z", var=i, polarity=b, row=j)
                edge(f"vl:{x}:{b}:{j}", f"v{b}:{x}", f"l:{x}:{b}:{j}:1", "zero", var=i, polarity=b, row=j)
                edge(f"rz:{x}:{b}:{j}", f"r:{x}:{b}:{j}:{cols}", f"z:{x}:{b}:{j}", "zero",
                     var=i, polarity=b, row=j)
                edge(f"zc:{x}:{b}:{j}", f"z:{x}:{b}:{j}", f"c:{lits[j - 1]}", "zero",
                     var=i, polarity=b, row=j, clause=lits[j - 1])
            if stage == "g1":
                continue
            for j in range(1, rows):
                for k in range(1, cols + 1):
                    edge(f"rd:{x}:{b}:{j}:{k}", f"r:{x}:{b}:{j}:{k}", f"l:{x}:{b}:{j + 1}:{k}",
                         "zero", var=i, polarity=b, row=j, col=k)
            if rows:
                for k, cl in enumerate(stats.clauses[(i, 1 - b)], 1):
                    edge(f"rc:{x}:{b}:{k}", f"r:{x}:{b}:{rows}:{k}", f"c:{cl}", "six",
                         var=i, polarity=b, col=k, clause=cl)
        if stage == "g1":
            continue
        for b in (0, 1):
            for j, cl in enumerate(stats.clauses[(i, b)], 1):
                node(f"o:{x}:{b}:{j}", kind="o", var=i, polarity=b, index=j, clause=cl)
                edge(f"oz:{x}:{b}:{j}", f"o:{x}:{b}:{j}", f"z:{x}:{b}:{j}", "six",
                     var=i, polarity=b, index=j)
                edge(f"ol:{x}:{b}:{j}", f"o:{x}:{b}:{j}", f"l:{x}:{1 - b}:1:{j}", "zero",
                     var=i, polarity=b, index=j)
    for j in range(1, formula.n_clauses + 1):
        node(f"c:{j}", kind="c", clause=j)

    players: list[tuple[str, str]] = []
    player_roles: dict[int, dict] = {}
    for j in range(1, formula.n_clauses + 1):
        players.append(("s", f"c:{j}"))
        player_roles[len(players)] = {"role": "clause", "clause": j}
    if stage != "g1":
        for i in range(1, formula.n_vars + 1):
            for b in (0, 1):
                for j, cl in enumerate(stats.clauses[(i, b)], 1):
                    players.append((f"o:x{i}:{b}:{j}", f"c:{cl}"))
                    player_roles[len(players)] = {
                        "role": "occurrence", "var": i, "polarity": b, "index": j, "clause": cl}
    if stage == "g3":
        for i in range(1, formula.n_vars + 1):
            players.append((f"v0:x{i}", f"v1:x{i}"))
            player_roles[len(players)] = {"role": "variable", "var": i}

    n = len(players)
    m_value = big_m(formula, len(edges))
    tables = {
        "const0": [0] * (n + 1),
        "const2": [2] * (n + 1),
        "const7": [7] * (n + 1),
        "linear2": [2 * k for k in range(1, n + 2)],
        "zero": [0] + [m_value] * n,
        "six": [6] + [m_value] * n,
    }
    game = make_game(nodes, [(e, u, v, tables[kind]) for e, u, v, kind in edges], players)
    return GadgetGame(game, formula, stage, m_value, node_roles, player_roles, edge_roles)


def default_choice(formula: CnfFormula, assignment: Sequence[int]) -> dict[int, int]:
    """First literal of each clause that the assignment makes true."""
    out = {}
    for j, clause in enumerate(formula.clauses, 1):
        lit = next((x for x in clause if _true(x, assignment)), None)
        if lit is None:
            raise GameError(f"assignment does not satisfy clause {j}")
        out[j] = lit
    return out


def _check_assignment(formula: CnfFormula, assignment: Sequence[int]) -> tuple[int, ...]:
    assignment = tuple(int(v) for v in assignment)
    if len(assignment) != formula.n_vars or any(v not in (0, 1) for v in assignment):
        raise GameError(f"an assignment is a 0/1 vector of length {formula.n_vars}")
    return assignment


def build_intended_state(formula: CnfFormula, gadget: GadgetGame, assignment: Sequence[int],
                         clause_choice: Mapping[int, int] | None = None) -> dict[int, tuple[str, ...]]:
    """The profile the construction is designed around.

    ``clause_choice`` maps each clause index to a literal of that clause
    that ``assignment`` makes true (default: :func:`default_choice`).
    """
    assignment = _check_assignment(formula, assignment)
    choice = dict(clause_choice) if clause_choice is not None else default_choice(formula, assignment)
    stats = occurrence_stats(formula)
    state: dict[int, tuple[str, ...]] = {}
    held = set()  # (var, polarity, row) whose z -> c edge a clause player takes
    for pid, role in gadget.player_roles.items():
        if role["role"] != "clause":
            continue
        j = role["clause"]
        lit = choice.get(j)
        if lit is None or lit not in formula.clauses[j - 1]:
            raise GameError(f"clause {j}: chosen literal {lit} is not in the clause")
        if not _true(lit, assignment):
            raise GameError(f"clause {j}: chosen literal {lit} is false under the assignment")
        i, b = abs(lit), int(lit > 0)
        x = f"x{i}"
        q = stats.clauses[(i, b)].index(j) + 1
        _, cols, _ = _grid_shape(stats, i, b, gadget.stage)
        path = [f"sv:{x}", f"vv{b}:{x}", f"vl:{x}:{b}:{q}"]
        for k in range(1, cols + 1):
            path.append(f"lr:{x}:{b}:{q}:{k}")
            if k < cols:
                path.append(f"rl:{x}:{b}:{q}:{k}")
        path += [f"rz:{x}:{b}:{q}", f"zc:{x}:{b}:{q}"]
        state[pid] = tuple(path)
        held.add((i, b, q))
    for pid, role in gadget.player_roles.items():
        if role["role"] == "occurrence":
            i, b, q = role["var"], role["polarity"], role["index"]
            x = f"x{i}"
            if (i, b, q) not in held:
                state[pid] = (f"oz:{x}:{b}:{q}", f"zc:{x}:{b}:{q}")
                continue
            rows, _, _ = _grid_shape(stats, i, 1 - b, gadget.stage)
            path = [f"ol:{x}:{b}:{q}"]
            for r in range(1, rows + 1):
                path.append(f"lr:{x}:{1 - b}:{r}:{q}")
                path.append(f"rd:{x}:{1 - b}:{r}:{q}" if r < rows else f"rc:{x}:{1 - b}:{q}")
            state[pid] = tuple(path)
        elif role["role"] == "variable":
            state[pid] = (f"v0v1:x{role['var']}",)
    return check_state(gadget.game, state)


def extract_assignment(gadget: GadgetGame, tolls: Mapping[str, Fraction]) -> tuple[int, ...]:
    """``x_i = 1`` exactly when the edge ``v0v1:x<i>`` carries a toll."""
    return tuple(
        int(Fraction(tolls.get(f"v0v1:x{i}", 0)) > 0) for i in range(1, gadget.formula.n_vars + 1)
    )


def extract_from_game(game: Game, tolls: Mapping[str, Fraction]) -> tuple[int, ...]:
    """:func:`extract_assignment` for a game loaded without its formula;
    the variable count is read off the ``v:x<i>`` nodes."""
    n = sum(1 for x in game.graph.nodes if x.startswith("v:x"))
    if n == 0:
        raise GameError("no variable gadgets in this game")
    return tuple(int(Fraction(tolls.get(f"v0v1:x{i}", 0)) > 0) for i in range(1, n + 1))


def min_weight_sat(formula: CnfFormula, max_vars: int = 20):
    """``(weight, assignment)`` of a least-weight satisfying assignment, or
    ``None`` when unsatisfiable.  Among equal weights the assignment whose
    set of true variables comes first lexicographically wins."""
    n = formula.n_vars
    if n > max_vars:
        raise ValueError(f"{n} variables exceed the brute-force bound {max_vars}")
    for weight in range(n + 1):
        for ones in combinations(range(n), weight):
            assignment = tuple(int(i in ones) for i in range(n))
            if formula.satisfied_by(assignment):
                return weight, assignment
    return None


def state_uses_big_m(gadget: GadgetGame, state: State) -> list[str]:
    """Edges whose cost under ``state`` is the big-M value."""
    n = loads(gadget.game, state)
    return sorted(e for e, k in n.items() if k and gadget.game.cost(e, k) >= gadget.big_m)


def clause_polarities(gadget: GadgetGame, state: State) -> dict[int, set[int]]:
    """Per variable, the polarities whose rows clause players traverse."""
    used: dict[int, set[int]] = {}
    for pid in gadget.players_with("clause"):
        for e in state[pid]:
            role = gadget.edge_roles[e]
            if e.startswith(("vl:", "lr:", "rl:", "rz:")):
                used.setdefault(role["var"], set()).add(role["polarity"])
    return used


@dataclass
class PropertyReport:
    """Outcome of the four checks; ``None`` marks a check that does not
    apply to the stage."""

    checks: dict[str, bool | None]
    details: dict[str, str]
    min_tolls: int | None = None
    tolls: dict | None = None
    min_weight: int | None = None
    extracted: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())

    def violations(self) -> list[str]:
        return [k for k, v in self.checks.items() if v is False]

    def to_obj(self) -> dict:
        return {
            "checks": {k: v for k, v in self.checks.items()},
            "details": dict(self.details),
            "min_tolls": self.min_tolls,
            "tolls": {e: str(t) for e, t in sorted((self.tolls or {}).items())},
            "min_weight": self.min_weight,
            "extracted": list(self.extracted) if self.extracted is not None else None,
        }


def verify_properties(formula: CnfFormula, gadget: GadgetGame, state: State,
                      budget: Budget = DEFAULT_BUDGET) -> PropertyReport:
    state = check_state(gadget.game, state)
    checks: dict[str, bool | None] = {}
    details: dict[str, str] = {}

    ends: dict[int, int] = {}
    for pid in gadget.players_with("clause"):
        sink = gadget.game.player(pid).sink
        j = gadget.node_roles[sink]["clause"]
        ends[j] = ends.get(j, 0) + 1
    bad = [j for j in range(1, formula.n_clauses + 1) if ends.get(j, 0) != 1]
    checks["I"] = not bad
    details["I"] = "every clause reached by one clause player" if not bad else f"clauses {bad}"

    mixed = sorted(i for i, pols in clause_polarities(gadget, state).items() if len(pols) > 1)
    checks["II"] = not mixed
    details["II"] = ("no variable used in both polarities" if not mixed
                     else "both polarities used for " + ", ".join(f"x{i}" for i in mixed))

    report = PropertyReport(checks, details)
    if gadget.stage != "g3":
        checks["III"] = checks["IV"] = None
        details["III"] = details["IV"] = "needs the variable players (stage g3)"
        return report
    best = min_weight_sat(formula)
    count, tolls, _ = min_tollbooths(gadget.game, state, budget)
    report.min_tolls, report.tolls = count, tolls
    if best is None:
        checks["III"] = checks["IV"] = None
        details["III"] = details["IV"] = "formula is unsatisfiable"
        return report
    report.min_weight = best[0]
    checks["III"] = count >= best[0]
    details["III"] = f"{count} tolled edges, least satisfying weight {best[0]}"
    extracted = extract_assignment(gadget, tolls)
    report.extracted = extracted
    weight = sum(extracted)
    checks["IV"] = formula.satisfied_by(extracted) and weight == best[0]
    details["IV"] = (f"extracted assignment {''.join(map(str, extracted))} (weight {weight}) "
                     + ("satisfies" if formula.satisfied_by(extracted) else "does not satisfy")
                     + " the formula")
    return report
