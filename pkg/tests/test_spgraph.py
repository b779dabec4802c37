import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tollbooth.game import GameError, make_game, social_cost
from tollbooth.generate import random_sp_instance, random_sp_tree
from tollbooth.spgraph import (
    Leaf,
    NotSeriesParallel,
    NotSymmetric,
    Parallel,
    Series,
    SPError,
    annotate,
    flatten,
    leaves,
    normalize,
    parse_term,
    postorder,
    recognize,
    to_term,
)


def leaf_partition(tree):
    return sorted(tuple(sorted(x.edges)) for x in leaves(tree))


def test_parse_simple_terms():
    t = parse_term("P(e(a),S(e(b),e(c)))")
    assert isinstance(t, Parallel) and isinstance(t.right, Series)
    assert t.left.edges == ("a",)
    b = parse_term(" B( a , b ,c ) ")
    assert isinstance(b, Leaf) and b.edges == ("a", "b", "c")
    assert to_term(parse_term("S(e(x),B(y,z))")) == "S(e(x),B(y,z))"


@pytest.mark.parametrize("text", ["S(e(a))", "P(e(a),e(a))", "e(a", "X(e(a))", "e(a) e(b)", ""])
def test_parse_errors(text):
    with pytest.raises(SPError):
        parse_term(text)


def test_parse_with_graph_checks_terminals():
    g = make_game(["s", "m", "t"], [("a", "s", "m", [1, 1]), ("b", "m", "t", [1, 1])], [("s", "t")]).graph
    t = parse_term("S(e(b),e(a))", g, "s", "t")
    assert t.left.edges == ("a",) and t.left.source == "s" and t.left.sink == "m"
    with pytest.raises(SPError):
        parse_term("P(e(a),e(b))", g, "s", "t")


def test_recognize_triangle():
    g = make_game(["s", "m", "t"], [("st", "s", "t", [1, 1]), ("sm", "s", "m", [1, 1]),
                                    ("mt", "m", "t", [1, 1])], [("s", "t")]).graph
    t = recognize(g, "s", "t")
    assert isinstance(t, Parallel)
    assert leaf_partition(t) == [("mt",), ("sm",), ("st",)]
    kinds = {type(x) for x in (t.left, t.right)}
    assert kinds == {Leaf, Series}


def test_recognize_bundle():
    g = make_game(["s", "t"], [("a", "s", "t", [1, 1]), ("b", "s", "t", [1, 1])], [("s", "t")]).graph
    t = recognize(g, "s", "t")
    assert isinstance(t, Leaf) and sorted(t.edges) == ["a", "b"]


def test_recognize_rejects_k4():
    nodes = ["a", "b", "c", "d"]
    edges = [(f"{u}{v}", u, v, [1, 1]) for i, u in enumerate(nodes) for v in nodes[i + 1:]]
    g = make_game(nodes, edges, [("a", "b")]).graph
    for s, t in [("a", "b"), ("a", "c"), ("c", "d")]:
        with pytest.raises(NotSeriesParallel):
            recognize(g, s, t)


def test_normalize_examples():
    assert to_term(normalize(parse_term("P(e(a),e(b))"))) == "B(a,b)"
    t = normalize(parse_term("P(e(a),S(e(b),e(c)))"))
    assert to_term(t) == "P(e(a),S(e(b),e(c)))"
    assert to_term(normalize(parse_term("B(a,b)"))) == "B(a,b)"


@given(st.integers(1, 40), st.integers(0, 10**6))
def test_recognize_inverts_flatten(m, seed):
    tree = random_sp_tree(m, random.Random(seed))
    graph = flatten(tree)
    again = normalize(recognize(graph, tree.source, tree.sink))
    # bundles are exactly the classes of parallel edges
    classes = {}
    for e in graph.edges:
        classes.setdefault((e.u, e.v), []).append(e.id)
    assert leaf_partition(again) == sorted(tuple(sorted(c)) for c in classes.values())
    assert leaf_partition(recognize(flatten(again), again.source, again.sink)) == leaf_partition(again)


def test_annotate_leaf_costs(two_links):
    game, state = two_links
    tree = parse_term("B(e1,e2)", game.graph, "s", "t")
    ann = annotate(tree, game, state)
    assert ann.node_costs(tree) == {1: 2, 2: 5}
    assert ann.cmax(tree) == 5


def test_annotate_series_and_empty_branch():
    game = make_game(["s", "m", "t"], [("a", "s", "m", [1, 2]), ("b", "m", "t", [3, 4]),
                                       ("c", "s", "t", [9, 9])], [("s", "t")])
    tree = parse_term("P(S(e(a),e(b)),e(c))", game.graph, "s", "t")
    ann = annotate(tree, game, {1: ("a", "b")})
    assert ann.node_costs(tree.left) == {1: 4}
    assert ann.node_players(tree.right) == frozenset()
    assert ann.cmax(tree.right) == 0


def test_annotate_rejects_asymmetric_games():
    game = make_game(["s", "t", "u"], [("a", "s", "t", [1, 1, 1]), ("b", "t", "u", [1, 1, 1])],
                     [("s", "t"), ("s", "u")])
    with pytest.raises(NotSymmetric):
        annotate(parse_term("S(e(a),e(b))"), game, {1: ("a",), 2: ("a", "b")})
    assert issubclass(NotSymmetric, GameError)


@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 10**6))
def test_annotation_consistency(m, n, seed):
    tree, game, state = random_sp_instance(m, n, seed)
    ann = annotate(tree, game, state)
    assert sum(ann.node_costs(tree).values()) == social_cost(game, state)
    for node in postorder(tree):
        if isinstance(node, Parallel):
            left, right = ann.node_players(node.left), ann.node_players(node.right)
            assert not left & right
            assert left | right == ann.node_players(node)
        elif isinstance(node, Series):
            c = ann.node_costs(node)
            assert c == {p: ann.node_costs(node.left)[p] + ann.node_costs(node.right)[p] for p in c}


def test_deep_trees_need_no_recursion():
    # a 3000-edge series chain is far deeper than the interpreter stack limit
    text = "e(x0)"
    for i in range(1, 3000):
        text = f"S({text},e(x{i}))"
    tree = parse_term(text)
    graph = flatten(tree)
    again = recognize(graph, tree.source, tree.sink)
    assert len(leaves(again)) == 3000
