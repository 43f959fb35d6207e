import pytest

from msoext_cli.core.graph import Graph
from msoext_cli.core import treedecomp
from msoext_cli.core.treedecomp import (
    NodeKind, TreeDecomposition, check_tree_decomposition, format_td, from_tree_edges,
    heuristic_tree_decomposition, incidence_structure, make_nice, parse_td, top_node,
    validate_tree_decomposition,
)
from msoext_cli.problems.generators import (
    complete_graph, cycle_graph, edgeless_graph, path_graph, random_partial_ktree, random_tree,
)
from msoext_cli.utils.exceptions import InvalidDecomposition, ParseError, VertexNotInDecomposition


def single_bag(vertices):
    return TreeDecomposition((frozenset(vertices),), (None,))


def test_triangle_single_bag_is_valid():
    ok, report = validate_tree_decomposition(complete_graph(3), single_bag({0, 1, 2}))
    assert ok and report is None


def test_triangle_two_bags_misses_an_edge():
    td = from_tree_edges([{0, 1}, {1, 2}], [(0, 1)])
    ok, report = validate_tree_decomposition(complete_graph(3), td)
    assert not ok
    assert "edge 1-3" in report


def test_path_two_bags_is_valid():
    td = from_tree_edges([{0, 1}, {1, 2}], [(0, 1)])
    assert validate_tree_decomposition(path_graph(3), td) == (True, None)


def test_disconnected_occurrences_are_reported():
    td = from_tree_edges([{0, 1}, {1, 2}, {0, 2}], [(0, 1), (1, 2)])
    ok, report = validate_tree_decomposition(path_graph(3), td)
    assert not ok
    assert "vertex 1" in report


def test_make_nice_single_edge():
    g = path_graph(2)
    ntd = make_nice(g, single_bag({0, 1}))
    assert ntd.width == 1
    assert ntd.size <= 16
    assert ntd.check_nice() is None
    assert check_tree_decomposition(g, ntd) is None


def test_make_nice_single_vertex_chain():
    ntd = make_nice(edgeless_graph(1), single_bag({0}))
    assert ntd.kinds == (NodeKind.LEAF, NodeKind.INTRODUCE, NodeKind.FORGET)
    assert top_node(ntd, 0) == 1


def test_make_nice_cycle_keeps_width():
    g = cycle_graph(4)
    td = from_tree_edges([{0, 1, 2}, {0, 2, 3}], [(0, 1)])
    ntd = make_nice(g, td)
    assert ntd.width == 2
    assert ntd.check_nice() is None
    assert validate_tree_decomposition(g, ntd)[0]


def test_make_nice_rejects_invalid_input():
    with pytest.raises(InvalidDecomposition):
        make_nice(complete_graph(3), from_tree_edges([{0, 1}, {1, 2}], [(0, 1)]))


@pytest.mark.parametrize("seed", range(12))
def test_make_nice_size_and_top_on_random_graphs(seed):
    g = random_partial_ktree(8, 2, seed=seed)
    ntd = make_nice(g, heuristic_tree_decomposition(g))
    assert ntd.check_nice() is None
    assert validate_tree_decomposition(g, ntd)[0]
    assert ntd.size <= 8 * g.n
    assert ntd.bags[ntd.root] == frozenset()
    for v in range(g.n):
        scan = [a for a, bag in enumerate(ntd.bags)
                if v in bag and (ntd.parent[a] is None or v not in ntd.bags[ntd.parent[a]])]
        assert scan == [top_node(ntd, v)]


@pytest.mark.parametrize("seed", range(30))
def test_make_nice_stays_within_8n_on_partial_ktrees(seed):
    g = random_partial_ktree(6 + seed % 7, 1 + seed % 3, seed=seed)
    ntd = make_nice(g, heuristic_tree_decomposition(g))
    assert ntd.size <= 8 * g.n
    assert ntd.width == heuristic_tree_decomposition(g).width


def test_make_nice_refuses_a_star_of_wide_leaves():
    # every leaf re-introduces the 20 shared vertices from an empty bag
    core = set(range(20))
    bags = [core] + [core | {20 + i} for i in range(20)]
    td = from_tree_edges(bags, [(0, i) for i in range(1, 21)])
    g = edgeless_graph(40)
    assert check_tree_decomposition(g, td) is None
    with pytest.raises(InvalidDecomposition, match="8n"):
        make_nice(g, td)


def test_top_of_missing_vertex():
    ntd = make_nice(edgeless_graph(1), single_bag({0}))
    with pytest.raises(VertexNotInDecomposition):
        ntd.top(5)


@pytest.mark.parametrize("graph, width", [
    (random_tree(6, seed=3), 1),
    (cycle_graph(5), 2),
    (complete_graph(4), 3),
])
def test_heuristic_widths(graph, width):
    td = heuristic_tree_decomposition(graph)
    assert validate_tree_decomposition(graph, td)[0]
    assert td.width == width


def test_exact_search_only_when_asked(monkeypatch):
    calls = []
    search = treedecomp.exact_treewidth_ordering

    def counted(g):
        calls.append(g.n)
        return search(g)

    monkeypatch.setattr(treedecomp, "exact_treewidth_ordering", counted)
    g = cycle_graph(6)
    assert heuristic_tree_decomposition(g).width == 2
    assert calls == []
    td = heuristic_tree_decomposition(g, exact=True)
    assert calls == [6]
    assert td.width == 2
    assert validate_tree_decomposition(g, td)[0]
    heuristic_tree_decomposition(cycle_graph(20), exact=True, exact_limit=12)
    assert calls == [6]


def test_min_fill_path_for_larger_graphs():
    g = cycle_graph(20)
    td = heuristic_tree_decomposition(g, exact_limit=12)
    assert validate_tree_decomposition(g, td)[0]
    assert td.width == 2


def test_incidence_structure_of_triangle():
    g = complete_graph(3)
    inc = incidence_structure(g, single_bag({0, 1, 2}))
    assert inc.graph.n == 6
    assert inc.graph.m == 9
    assert inc.graph.is_sigma2
    assert inc.graph.label("L_E") == frozenset({3, 4, 5})
    assert validate_tree_decomposition(inc.graph, inc.td)[0]
    assert inc.td.width <= 3


@pytest.mark.parametrize("seed", range(8))
def test_incidence_structure_width_grows_by_at_most_one(seed):
    g = random_partial_ktree(7, 2, seed=seed)
    td = heuristic_tree_decomposition(g)
    inc = incidence_structure(g, td)
    assert validate_tree_decomposition(inc.graph, inc.td)[0]
    assert inc.td.width <= td.width + 1
    for u, v in g.edges():
        assert inc.graph.has_edge(u, v)
        x = inc.vertex_of_edge[(u, v)]
        assert set(inc.graph.neighbors(x)) == {u, v}


def test_incidence_structure_of_edgeless_graph():
    g = edgeless_graph(3)
    td = from_tree_edges([{0}, {1}, {2}], [(0, 1), (1, 2)])
    inc = incidence_structure(g, td)
    assert inc.graph.n == 3 and inc.graph.m == 0
    assert inc.td == td


def test_td_file_format():
    g = path_graph(3)
    td = from_tree_edges([{0, 1}, {1, 2}], [(0, 1)])
    text = format_td(td, g.n)
    assert text.splitlines()[0] == "td 2 2 3"
    again = parse_td(text)
    assert again.bags == td.bags
    assert validate_tree_decomposition(g, parse_td("s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n"))[0]


def test_td_parse_errors():
    with pytest.raises(ParseError):
        parse_td("b 1 1 2\n")
    with pytest.raises(ParseError):
        parse_td("td 2 2 3\nb 1 1 2\n")
