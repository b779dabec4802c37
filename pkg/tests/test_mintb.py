from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import const, linear
from tollbooth.game import INF, is_pne, make_game
from tollbooth.generate import random_sp_instance
from tollbooth.mintb import (
    ListInvariantError,
    TollabilityEntry,
    TollabilityList,
    build_lists,
    check_list,
    compose_parallel,
    compose_series,
    implement,
    leaf_list,
    place_tolls,
    run,
    solve,
)
from tollbooth.oracle import BudgetExceeded, min_tollbooths
from tollbooth.spgraph import NotSeriesParallel, NotSymmetric, annotate, parse_term


def lst(lambda0, pairs):
    return TollabilityList(Fraction(lambda0), tuple(TollabilityEntry(e, l) for e, l in pairs))


def test_leaf_two_links():
    out = leaf_list([linear(2, 2), const(5, 2)], [1, 1])
    assert out.lambda0 == 5
    assert out.pairs() == [(1, 5), (2, INF)]


def test_leaf_single_edge():
    out = leaf_list([linear(5, 1)], [1])
    assert out.lambda0 == 10
    assert out.pairs() == [(0, 10), (1, INF)]


def test_leaf_unsaturated_bundle():
    out = leaf_list([linear(1, 3), linear(2, 3), const(6, 3)], [2, 1, 0])
    assert out.lambda0 == 3
    assert out.pairs() == [(0, 3), (1, 4), (2, 6), (3, INF)]


def test_leaf_ignores_unused_expensive_link():
    # an unused link's own price is paid by nobody
    out = leaf_list([const(1, 1), const(50, 1)], [1, 0])
    assert out.eta_min == 0 and out.lambda0 == 1


def test_leaf_errors():
    with pytest.raises(ValueError):
        leaf_list([], [])
    with pytest.raises(ValueError):
        leaf_list([const(1, 1)], [1, 0])


def test_series_example():
    out = compose_series(lst(3, [(1, 4), (2, INF)]), lst(2, [(0, 6), (1, INF)]))
    assert out.lambda0 == 5
    assert out.pairs() == [(1, 10), (2, INF)]
    assert (out.entries[0].idx_v, out.entries[0].idx_w) == (0, 0)


def test_series_with_saturated_child():
    lv = lst(3, [(1, 4), (2, 7), (3, INF)])
    out = compose_series(lv, lst(0, [(0, INF)]))
    assert out.lambda0 == 3
    assert out.pairs() == [(1, INF)]


def test_parallel_example():
    out = compose_parallel(lst(4, [(0, 5), (1, INF)]), lst(2, [(0, 3), (1, 6), (2, INF)]), 4, 2)
    assert out.lambda0 == 4
    assert out.pairs() == [(1, 5), (2, 6), (3, INF)]


def test_parallel_is_symmetric():
    a, b = lst(4, [(0, 5), (1, INF)]), lst(2, [(0, 3), (1, 6), (2, INF)])
    assert compose_parallel(a, b, 4, 2).pairs() == compose_parallel(b, a, 2, 4).pairs()


def test_check_list_rejects_bad_lists():
    check_list(lst(1, [(0, 2), (1, INF)]))
    for bad in (lst(1, []), lst(1, [(0, 2), (2, INF)]), lst(1, [(0, 5), (1, 4), (2, INF)]),
                lst(1, [(0, 2), (1, 3)]), lst(3, [(0, 2), (1, INF)])):
        with pytest.raises(ListInvariantError):
            check_list(bad)


def two_link_ann(two_links):
    game, state = two_links
    tree = parse_term("B(e1,e2)", game.graph, "s", "t")
    ann = annotate(tree, game, state)
    return tree, ann, build_lists(ann)


def test_place_tolls_on_leaf(two_links):
    tree, ann, lists = two_link_ann(two_links)
    out = {}
    place_tolls(ann, lists, tree, 5, out)
    assert out == {"e1": 1}
    out = {}
    place_tolls(ann, lists, tree, 6, out)
    assert out == {"e1": 2, "e2": 1}


def test_place_tolls_below_lambda0_is_an_error(two_links):
    tree, ann, lists = two_link_ann(two_links)
    with pytest.raises(ListInvariantError):
        place_tolls(ann, lists, tree, 4, {})


def test_series_split_at_lambda0():
    game = make_game(["s", "m", "t"], [("a", "s", "m", linear(1, 1)), ("b", "m", "t", linear(2, 1))],
                     [("s", "t")])
    tree = parse_term("S(e(a),e(b))", game.graph, "s", "t")
    ann = annotate(tree, game, {1: ("a", "b")})
    lists = build_lists(ann)
    assert lists[id(tree)].lambda0 == 6
    out, costs = {}, {}
    place_tolls(ann, lists, tree, 6, out, costs)
    assert out == {} and costs == {1: 3}


def test_solve_two_links(two_links):
    game, state = two_links
    assert solve(game, state) == ({"e1": 1}, 1)


def test_solve_pne_needs_nothing():
    game = make_game(["s", "t"], [("a", "s", "t", linear(1, 2)), ("b", "s", "t", linear(1, 2))],
                     [("s", "t"), ("s", "t")])
    assert solve(game, {1: ("a",), 2: ("b",)}) == ({}, 0)


def test_solve_errors():
    nodes = ["a", "b", "c", "d"]
    edges = [(f"{u}{v}", u, v, const(1, 1)) for i, u in enumerate(nodes) for v in nodes[i + 1:]]
    k4 = make_game(nodes, edges, [("a", "d")])
    with pytest.raises(NotSeriesParallel):
        solve(k4, {1: ("ad",)})
    two = make_game(["s", "m", "t"], [("a", "s", "m", const(1, 2)), ("b", "m", "t", const(1, 2))],
                    [("s", "t"), ("s", "m")])
    with pytest.raises(NotSymmetric):
        solve(two, {1: ("a", "b"), 2: ("a",)})


def hand_counterexample():
    flat = lambda c: (c, c, c)
    game = make_game(
        ["s", "m", "t"],
        [("e1", "s", "m", flat(5)), ("e2", "s", "m", flat(1)), ("f1", "m", "t", flat(1)),
         ("f2", "m", "t", flat(5)), ("u", "s", "t", flat(7))],
        [("s", "t"), ("s", "t")],
    )
    return game, {1: ("e1", "f1"), 2: ("e2", "f2")}


def test_parallel_bound_must_include_branch_tolls():
    # both players pay 6 untolled, but the series branch needs tolls that
    # push one of them above the 7 offered by the outside link
    game, state = hand_counterexample()
    tree = parse_term("P(S(B(e1,e2),B(f1,f2)),e(u))", game.graph, "s", "t")
    ann = annotate(tree, game, state)
    naive = build_lists(ann, tolled=False)
    tolls = {}
    place_tolls(ann, naive, tree, naive[id(tree)].lambda0, tolls)
    assert not is_pne(game, tolls, state)[0]

    tolls, count = solve(game, state, tree)
    assert is_pne(game, tolls, state)[0]
    assert count == min_tollbooths(game, state)[0]


def test_run_exposes_lists(two_links):
    game, state = two_links
    sol = run(game, state, check=True)
    assert sol.count == len(sol.tolls) == 1
    assert sol.lambda0 == 5
    assert sol.lists[id(sol.tree)].lambda0 == 5


@given(st.integers(1, 8), st.integers(1, 3), st.integers(0, 10**6))
def test_matches_exhaustive_oracle(m, n, seed):
    tree, game, state = random_sp_instance(m, n, seed)
    tolls, count = solve(game, state, tree, check=True)
    assert is_pne(game, tolls, state)[0]
    try:
        best, _, _ = min_tollbooths(game, state)
    except BudgetExceeded:
        return
    assert count == best


@given(st.integers(1, 40), st.integers(1, 6), st.integers(0, 10**6))
def test_lists_satisfy_invariants(m, n, seed):
    tree, game, state = random_sp_instance(m, n, seed)
    tolls, lists, ann = implement(game, state, tree)
    for lst_ in lists.values():
        check_list(lst_)
    assert all(t > 0 for t in tolls.values())
