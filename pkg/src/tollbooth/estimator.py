"""scikit-learn style front end for the series-parallel solver.

``fit`` takes a game and a state (the pair plays the role of ``X``),
``transform`` returns a game with the fitted tolls folded into its cost
tables.  Parameters follow the estimator conventions, so ``get_params``,
``set_params`` and ``clone`` work as usual.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import io
from .game import Game, GameError, check_state, tolled_game
from .mintb import run
from .spgraph import SPTree, parse_term


def check_game(game) -> Game:
    """Accept a :class:`Game` or its JSON object form."""
    if isinstance(game, Game):
        return game
    if isinstance(game, dict):
        return io.game_from_obj(game)
    raise GameError(f"expected a Game or a game document, got {type(game).__name__}")


def check_sp_state(game: Game, state) -> dict[int, tuple[str, ...]]:
    if not isinstance(state, dict):
        raise GameError("a state is a mapping from player id to edge ids")
    return check_state(game, {int(k): v for k, v in state.items()})


def check_tree(game: Game, tree) -> SPTree | None:
    if tree is None or not isinstance(tree, str):
        return tree
    p = game.players[0]
    return parse_term(tree, game.graph, p.source, p.sink)


class SPTollbooth(TransformerMixin, BaseEstimator):
    """Minimum-support tolls implementing a state on a series-parallel game.

    Parameters
    ----------
    check_lists : bool
        Assert the invariants of every tollability list while fitting.
    certify : bool
        Re-check the fitted tolls with a best-response search.

    Attributes
    ----------
    tolls_ : dict of edge id to Fraction
    n_tolled_ : int
    lambda0_ : Fraction
        Cheapest entry cost of the tolled network for an extra player.
    tree_ : parse tree used
    """

    def __init__(self, check_lists: bool = False, certify: bool = True):
        self.check_lists = check_lists
        self.certify = certify

    def fit(self, game, state, tree=None):
        game = check_game(game)
        state = check_sp_state(game, state)
        sol = run(game, state, check_tree(game, tree), check=self.check_lists, certify=self.certify)
        self.tree_ = sol.tree
        self.root_list_ = sol.lists[id(sol.tree)]
        self.lambda0_ = sol.lambda0
        self.tolls_ = sol.tolls
        self.n_tolled_ = sol.count
        return self

    def transform(self, game):
        check_is_fitted(self, "tolls_")
        return tolled_game(check_game(game), self.tolls_)

    def fit_transform(self, game, state, tree=None):
        return self.fit(game, state, tree).transform(game)
