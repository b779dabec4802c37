from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from tollbooth.game import make_game

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def const(c, n):
    return [c] * (n + 1)


def linear(a, n):
    return [a * k for k in range(1, n + 2)]


@pytest.fixture
def micro():
    """Three nodes A, A0, A1: edges A-A1 (7), A-A0 (2), A0-A1 (2x);
    player 1 goes A -> A1, player 2 goes A0 -> A1."""
    game = make_game(
        ["A", "A0", "A1"],
        [("AA1", "A", "A1", const(7, 2)), ("AA0", "A", "A0", const(2, 2)),
         ("A0A1", "A0", "A1", linear(2, 2))],
        [("A", "A1"), ("A0", "A1")],
    )
    state = {1: ("AA1",), 2: ("A0A1",)}
    return game, state


@pytest.fixture
def two_links():
    """Two players on parallel links e1 (2x) and e2 (5), one per link."""
    game = make_game(["s", "t"], [("e1", "s", "t", linear(2, 2)), ("e2", "s", "t", const(5, 2))],
                     [("s", "t"), ("s", "t")])
    return game, {1: ("e1",), 2: ("e2",)}


F = Fraction
