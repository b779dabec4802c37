import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tollbooth import io
from tollbooth.estimator import SPTollbooth
from tollbooth.game import GameError, is_pne
from tollbooth.generate import random_sp_instance


def test_params_and_clone():
    est = SPTollbooth(check_lists=True)
    assert est.get_params() == {"check_lists": True, "certify": True}
    twin = clone(est)
    assert twin is not est and twin.get_params() == est.get_params()
    est.set_params(certify=False)
    assert est.certify is False


def test_fit_transform(two_links):
    game, state = two_links
    est = SPTollbooth().fit(game, state)
    assert est.tolls_ == {"e1": 1} and est.n_tolled_ == 1 and est.lambda0_ == 5
    tolled = est.transform(game)
    assert tolled.costs["e1"] == (3, 5, 7)
    assert is_pne(tolled, {}, state)[0]


def test_accepts_documents_and_terms(two_links):
    game, state = two_links
    doc = io.game_to_obj(game)
    est = SPTollbooth().fit(doc, {"1": ["e1"], "2": ["e2"]}, tree="B(e2,e1)")
    assert est.n_tolled_ == 1


def test_errors(two_links):
    game, state = two_links
    with pytest.raises(NotFittedError):
        SPTollbooth().transform(game)
    with pytest.raises(GameError):
        SPTollbooth().fit("not a game", state)
    with pytest.raises(GameError):
        SPTollbooth().fit(game, [("e1",)])


@pytest.mark.parametrize("seed", range(10))
def test_transform_yields_equilibrium(seed):
    tree, game, state = random_sp_instance(12, 4, seed)
    tolled = SPTollbooth(check_lists=True).fit_transform(game, state, tree)
    assert is_pne(tolled, {}, state)[0]
