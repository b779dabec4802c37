"""Minimum tollbooths for atomic network congestion games."""

from .estimator import SPTollbooth
from .game import Game, GameError, is_pne, make_game, player_cost, social_cost
from .mintb import ListInvariantError, run, solve
from .oracle import Budget, BudgetExceeded, NotImplementable, min_tollbooths, social_optimum
from .reduction import CnfFormula, build_game, build_intended_state, parse_dimacs
from .spgraph import NotSeriesParallel, NotSymmetric, parse_term, recognize

__all__ = [
    "Budget", "BudgetExceeded", "CnfFormula", "Game", "GameError", "ListInvariantError",
    "NotImplementable", "NotSeriesParallel", "NotSymmetric", "SPTollbooth", "build_game",
    "build_intended_state", "is_pne", "make_game", "min_tollbooths", "parse_dimacs",
    "parse_term", "player_cost", "recognize", "run", "social_cost", "social_optimum", "solve",
]
__version__ = "0.1.0"
