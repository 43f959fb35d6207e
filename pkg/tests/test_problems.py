import itertools
import random

import pytest

from msoext_cli.core.graph import Graph, vertex_cover_number
from msoext_cli.eval.naive import mask_connected, to_mask
from msoext_cli.eval.oracle import brute_force_solve, verify_assignment
from msoext_cli.logic.constraints import IntervalSet
from msoext_cli.logic.instance import Fragment
from msoext_cli.nd.xp import solve_xp
from msoext_cli.problems import reference
from msoext_cli.problems.encoders import (
    color_classes, encode_balanced_partitioning, encode_capacitated_dominating_set,
    encode_domination_family, encode_equitable_coloring, encode_equitable_connected_partition,
    encode_graph_motif, half_edge_structure,
)
from msoext_cli.problems.generators import (
    complete_graph, cycle_graph, edgeless_graph, path_graph, random_graph, random_tree, star_graph,
)
from msoext_cli.problems.reductions import (
    LccSubsetInstance, SetMulticoverInstance, build_clique_gadget, encode_lcc_subset,
    format_set_multicover, has_multicolored_clique, lcc_from_instance, lcc_to_msog,
    lcc_to_set_multicover, multicolored_clique, random_multicolored_clique, solve_lcc_by_multicover,
    solve_set_multicover,
)
from msoext_cli.tw.solver import solve_tw
from msoext_cli.utils.config_manager import Limits
from msoext_cli.utils.exceptions import (
    ColorMissing, NonUniform, ResourceLimit, ShapeViolation, UnknownKind, ValidationError,
)

ZERO = IntervalSet.point(0)


def assert_verified(inst, assignment, limits=None):
    ok, reason = verify_assignment(inst, assignment, limits)
    assert ok, reason


def subsets(items):
    items = sorted(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def best_accepted(inst, candidates):
    """Smallest weight among the candidate witnesses the instance accepts, None if it accepts none."""
    weights = [inst.assignment_weight(tuple(a)) for a in candidates if verify_assignment(inst, list(a))[0]]
    return min(weights, default=None)


def half_choices(g):
    """Every way of giving each edge to one endpoint, as sets of half-edge vertices."""
    pairs = [(g.n + 2 * idx, g.n + 2 * idx + 1) for idx in range(g.m)]
    return [frozenset(pick) for pick in itertools.product(*pairs)]


# ----------------------------------------------------------------------------
# Partition problems
# ----------------------------------------------------------------------------

def test_equitable_two_coloring_of_c4():
    inst = encode_equitable_coloring(cycle_graph(4), 2)
    assert inst.fragment == Fragment.G_LIN
    result = brute_force_solve(inst)
    assert result.satisfiable
    first, second = result.assignment
    assert len(first) == len(second) == 2
    assert first | second == frozenset(range(4))


def test_triangle_has_no_equitable_two_coloring():
    assert not brute_force_solve(encode_equitable_coloring(complete_graph(3), 2)).satisfiable


@pytest.mark.parametrize("seed", range(50))
def test_equitable_coloring_matches_direct_search(seed):
    g = random_graph(3 + seed % 3, 0.5, seed=seed)
    result = brute_force_solve(encode_equitable_coloring(g, 2))
    assert result.satisfiable == (reference.equitable_coloring(g, 2) is not None)


def test_connected_partition_of_p5():
    g = path_graph(5)
    result = brute_force_solve(encode_equitable_connected_partition(g, 2))
    assert result.satisfiable
    assert sorted(len(part) for part in result.assignment) == [2, 3]
    assert all(mask_connected(g, to_mask(part)) for part in result.assignment)


def test_star_has_no_connected_equitable_halving():
    g = star_graph(3)
    assert reference.equitable_connected_partition(g, 2) is None
    assert not brute_force_solve(encode_equitable_connected_partition(g, 2)).satisfiable


def cut_assignment(g, coloring, k):
    parts = [frozenset(v for v in range(g.n) if coloring[v] == i) for i in range(k)]
    cut = frozenset(g.n + idx for idx, (u, v) in enumerate(g.edges()) if coloring[u] != coloring[v])
    return parts, cut


def test_balanced_partitioning_of_p3_cuts_one_edge():
    g = path_graph(3)
    result = brute_force_solve(encode_balanced_partitioning(g, 2))
    assert result.satisfiable
    assert result.weight == 1 == reference.min_balanced_cut(g, 2)


def test_single_part_cuts_nothing():
    result = brute_force_solve(encode_balanced_partitioning(path_graph(3), 1))
    assert result.satisfiable
    assert result.weight == 0


@pytest.mark.parametrize("g", [path_graph(4), complete_graph(4)], ids=["P4", "K4"])
def test_balanced_partitioning_accepts_exactly_the_equitable_cuts(g):
    inst = encode_balanced_partitioning(g, 2)
    for coloring in itertools.product(range(2), repeat=g.n):
        parts, cut = cut_assignment(g, coloring, 2)
        ok, _ = verify_assignment(inst, parts + [cut])
        assert ok == (abs(len(parts[0]) - len(parts[1])) <= 1)
        if ok and cut:
            assert not verify_assignment(inst, parts + [cut - {min(cut)}])[0]
            assert inst.assignment_weight(tuple(parts + [cut])) == len(cut)


def test_balanced_partitioning_uses_edge_weights():
    g = path_graph(4)
    weights = {(0, 1): 5, (1, 2): 1, (2, 3): 5}
    inst = encode_balanced_partitioning(g, 2, weights)
    parts, cut = cut_assignment(g, (0, 0, 1, 1), 2)
    assert inst.assignment_weight(tuple(parts + [cut])) == 1
    assert reference.min_balanced_cut(g, 2, weights) == 1


# ----------------------------------------------------------------------------
# Domination family
# ----------------------------------------------------------------------------

@pytest.mark.parametrize("capacity, expected", [(3, 1), (2, 2), (1, 3)])
def test_capacitated_domination_of_a_star(capacity, expected):
    g = star_graph(3)
    caps = [capacity, 0, 0, 0]
    result = brute_force_solve(encode_capacitated_dominating_set(g, caps))
    assert result.satisfiable
    assert result.weight == expected == reference.min_capacitated_dominating_set(g, caps)


def test_edgeless_graph_dominates_itself():
    result = brute_force_solve(encode_capacitated_dominating_set(edgeless_graph(3), [0, 0, 0]))
    assert result.assignment[0] == frozenset(range(3))


@pytest.mark.parametrize("seed", range(3))
def test_capacitated_domination_matches_flow_check(seed):
    g = random_tree(4, seed=seed)
    caps = [1, 2, 1, 1]
    result = brute_force_solve(encode_capacitated_dominating_set(g, caps))
    assert result.weight == reference.min_capacitated_dominating_set(g, caps)


def test_capacities_must_match_vertices():
    with pytest.raises(ValidationError):
        encode_capacitated_dominating_set(path_graph(3), [1, 1])


@pytest.mark.parametrize("demand, expected", [(1, 1), (2, 2)])
def test_vector_domination_of_a_triangle(demand, expected):
    g = complete_graph(3)
    inst = encode_domination_family("VectorDominatingSet", g, {"demands": [demand] * 3})
    result = brute_force_solve(inst)
    assert result.weight == expected == reference.min_vector_dominating_set(g, [demand] * 3)


def test_perfect_code_on_paths_and_cycles():
    params = {"sigma": IntervalSet.point(0), "rho": IntervalSet.point(1)}
    result = brute_force_solve(encode_domination_family("generalized-domination", path_graph(3), params))
    assert result.assignment == (frozenset({1}),)
    assert not brute_force_solve(encode_domination_family("GeneralizedDomination", cycle_graph(4), params)).satisfiable
    assert reference.generalized_dominating_set(cycle_graph(4), params["sigma"], params["rho"]) is None


def test_minimized_generalized_domination_is_weighted():
    params = {"sigma": [0, 1, 2], "rho": IntervalSet.range(1, None), "minimize": True}
    inst = encode_domination_family("GeneralizedDomination", star_graph(3), params)
    assert brute_force_solve(inst).weight == 1


def test_general_factor_on_a_triangle():
    g = complete_graph(3)
    degrees = [IntervalSet.point(1)] * 3
    assert reference.general_factor(g, degrees) is None
    assert not brute_force_solve(encode_domination_family("GeneralFactor", g, {"degrees": degrees})).satisfiable
    two = [IntervalSet.point(2)] * 3
    result = brute_force_solve(encode_domination_family("GeneralFactor", g, {"degrees": two}))
    assert result.assignment == (frozenset({3, 4, 5}),)


def test_half_edge_structure_layout():
    h, halves = half_edge_structure(path_graph(2))
    assert h.n == 4
    assert halves == {2: (0, 3), 3: (1, 2)}
    assert set(h.edges()) == {(0, 2), (2, 3), (1, 3)}


@pytest.mark.parametrize("g, bound, expected", [
    (complete_graph(3), 1, True),
    (complete_graph(3), 0, False),
    (cycle_graph(4), 1, True),
])
def test_min_max_outdegree(g, bound, expected):
    inst = encode_domination_family("MinMaxOutdegree", g, {"bound": bound})
    result = brute_force_solve(inst)
    assert result.satisfiable == expected == (reference.orientation_within(g, bound) is not None)
    if expected:
        (chosen,) = result.assignment
        h, halves = half_edge_structure(g)
        for half, (owner, partner) in halves.items():
            assert (half in chosen) != (partner in chosen)


@pytest.mark.parametrize("g, caps", [
    (path_graph(3), [0, 2, 0]),
    (path_graph(3), [1, 1, 1]),
    (Graph(4, [(0, 1), (2, 3)]), [1, 1, 1, 1]),
])
def test_capacitated_vertex_cover(g, caps):
    inst = encode_domination_family("CapacitatedVertexCover", g, {"capacities": caps})
    result = brute_force_solve(inst)
    assert result.weight == reference.min_capacitated_vertex_cover(g, caps)


def test_unknown_domination_kind():
    with pytest.raises(UnknownKind):
        encode_domination_family("TotalDomination", path_graph(3), {})


def test_encoded_orientation_runs_on_the_treewidth_solver():
    inst = encode_domination_family("MinMaxOutdegree", complete_graph(3), {"bound": 1})
    result = solve_tw(inst)
    assert result.satisfiable
    assert_verified(inst, result.assignment)


def test_encoded_coloring_runs_on_the_treewidth_solver():
    inst = encode_equitable_coloring(cycle_graph(4), 2)
    result = solve_tw(inst)
    assert result.satisfiable
    assert_verified(inst, result.assignment)
    assert not solve_tw(encode_equitable_coloring(complete_graph(3), 2)).satisfiable


# ----------------------------------------------------------------------------
# Graph motif
# ----------------------------------------------------------------------------

COLORED_P4 = Graph(4, [(0, 1), (1, 2), (2, 3)], {"r": [0, 3], "g": [1], "b": [2]})


def test_motif_found_on_a_colored_path():
    result = brute_force_solve(encode_graph_motif(COLORED_P4, ["r", "g", "b"]))
    assert result.satisfiable
    chosen = result.assignment[0]
    assert chosen in (frozenset({0, 1, 2}), frozenset({1, 2, 3}))
    assert reference.graph_motif(COLORED_P4, color_classes(COLORED_P4), {"r": 1, "g": 1, "b": 1}) is not None


def test_motif_needs_a_connected_occurrence():
    assert not brute_force_solve(encode_graph_motif(COLORED_P4, {"r": 2})).satisfiable
    assert reference.graph_motif(COLORED_P4, color_classes(COLORED_P4), {"r": 2}) is None


def test_motif_colors_must_exist():
    with pytest.raises(ColorMissing):
        encode_graph_motif(COLORED_P4, ["y"])
    with pytest.raises(ColorMissing):
        color_classes(Graph(2, [(0, 1)], {"r": [0]}))


def test_doubly_colored_vertex_is_rejected():
    with pytest.raises(ValidationError):
        color_classes(Graph(2, [(0, 1)], {"r": [0, 1], "g": [1]}))


# ----------------------------------------------------------------------------
# Seeded families against the direct algorithms
# ----------------------------------------------------------------------------

def colored_graph(rng, n):
    """Random graph on ``n`` vertices colored r/g, both colors present."""
    base = random_graph(n, 0.6, seed=rng.randrange(1 << 16))
    owner = ["r", "g"] + [rng.choice("rg") for _ in range(n - 2)]
    return Graph(n, base.edges(), {c: [v for v in range(n) if owner[v] == c] for c in "rg"})


@pytest.mark.parametrize("seed", range(50))
def test_connected_partition_matches_direct_search(seed):
    g = random_graph(3 + seed % 3, 0.5, seed=seed)
    result = brute_force_solve(encode_equitable_connected_partition(g, 2))
    assert result.satisfiable == (reference.equitable_connected_partition(g, 2) is not None)
    if result.satisfiable:
        assert all(mask_connected(g, to_mask(part)) for part in result.assignment)


@pytest.mark.parametrize("seed", range(50))
def test_balanced_partitioning_matches_min_cut(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.6, seed=seed)
    weights = {e: rng.randint(1, 4) for e in g.edges()}
    inst = encode_balanced_partitioning(g, 2, weights)
    candidates = []
    for coloring in itertools.product(range(2), repeat=g.n):
        parts, cut = cut_assignment(g, coloring, 2)
        candidates.append(parts + [cut])
    assert best_accepted(inst, candidates) == reference.min_balanced_cut(g, 2, weights)


@pytest.mark.parametrize("seed", range(50))
def test_capacitated_domination_matches_flow_reference(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.5, seed=seed)
    caps = [rng.randint(0, 2) for _ in range(g.n)]
    inst = encode_capacitated_dominating_set(g, caps)
    edge_vertices = range(g.n, g.n + g.m)
    candidates = [(d, f) for d in subsets(range(g.n)) for f in subsets(edge_vertices)]
    assert best_accepted(inst, candidates) == reference.min_capacitated_dominating_set(g, caps)


@pytest.mark.parametrize("seed", range(50))
def test_vector_domination_matches_direct_search(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.5, seed=seed)
    demands = [rng.randint(0, 2) for _ in range(g.n)]
    result = brute_force_solve(encode_domination_family("VectorDominatingSet", g, {"demands": demands}))
    assert result.weight == reference.min_vector_dominating_set(g, demands)


@pytest.mark.parametrize("seed", range(50))
def test_generalized_domination_matches_direct_search(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.5, seed=seed)
    sigma = IntervalSet.from_values(rng.sample(range(4), 2))
    rho = IntervalSet.from_values(rng.sample(range(4), 2))
    params = {"sigma": sigma, "rho": rho, "minimize": True}
    result = brute_force_solve(encode_domination_family("GeneralizedDomination", g, params))
    expected = reference.generalized_dominating_set(g, sigma, rho)
    assert result.satisfiable == (expected is not None)
    if expected is not None:
        assert result.weight == len(expected)


@pytest.mark.parametrize("seed", range(50))
def test_capacitated_vertex_cover_matches_flow_reference(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(2, 4), 0.6, seed=seed)
    caps = [rng.randint(0, 2) for _ in range(g.n)]
    inst = encode_domination_family("CapacitatedVertexCover", g, {"capacities": caps})
    candidates = [(c, a) for c in subsets(range(g.n)) for a in half_choices(g)]
    assert best_accepted(inst, candidates) == reference.min_capacitated_vertex_cover(g, caps)


@pytest.mark.parametrize("seed", range(50))
def test_general_factor_matches_direct_search(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.5, seed=seed)
    degrees = [IntervalSet.from_values(rng.sample(range(3), 2)) for _ in range(g.n)]
    inst = encode_domination_family("GeneralFactor", g, {"degrees": degrees})
    candidates = [(f,) for f in subsets(range(g.n, g.n + g.m))]
    found = best_accepted(inst, candidates) is not None
    assert found == (reference.general_factor(g, degrees) is not None)


@pytest.mark.parametrize("seed", range(50))
def test_bounded_outdegree_matches_direct_search(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 5), 0.5, seed=seed)
    bound = rng.randint(0, 2)
    inst = encode_domination_family("MinMaxOutdegree", g, {"bound": bound})
    found = best_accepted(inst, [(a,) for a in half_choices(g)]) is not None
    assert found == (reference.orientation_within(g, bound) is not None)


@pytest.mark.parametrize("seed", range(50))
def test_graph_motif_matches_direct_search(seed):
    rng = random.Random(seed)
    g = colored_graph(rng, rng.randint(3, 5))
    motif = {"r": rng.randint(0, 2), "g": rng.randint(1, 2)}
    inst = encode_graph_motif(g, motif)
    classes = color_classes(g)
    palette = sorted(classes)
    accepted = [s for s in subsets(range(g.n))
                if verify_assignment(inst, [s] + [s & classes[c] for c in palette])[0]]
    assert bool(accepted) == (reference.graph_motif(g, classes, motif) is not None)
    for s in accepted:
        assert mask_connected(g, to_mask(s))
        assert all(len(s & classes[c]) == motif[c] for c in palette)


# ----------------------------------------------------------------------------
# Multicolored clique and the LCC subset gadget
# ----------------------------------------------------------------------------

def test_padding_balances_classes_and_edge_sets():
    g = Graph(4, [(0, 1), (1, 2), (0, 2), (0, 3)])
    mc = multicolored_clique(g, [[0], [1], [2, 3]])
    assert mc.is_balanced()
    assert mc.m == 2
    assert len(has_multicolored_clique(mc)) == 3


def test_classes_must_be_independent():
    with pytest.raises(ValidationError):
        multicolored_clique(Graph(2, [(0, 1)]), [[0, 1]])


def test_planted_clique_is_found():
    mc, clique = random_multicolored_clique(3, 3, 4, planted=True, seed=2)
    assert mc.is_balanced()
    found = has_multicolored_clique(mc)
    assert found is not None
    g = mc.graph
    assert all(v in g.neighbor_set(u) for u, v in itertools.combinations(clique, 2))


def test_gadget_vertex_cover():
    mc, clique = random_multicolored_clique(3, 2, 2, planted=True, seed=1)
    gadget = build_clique_gadget(mc)
    lcc = gadget.lcc
    assert len(lcc.cover) == 9
    assert vertex_cover_number(lcc.graph) == 9
    witness = gadget.witness(clique)
    assert lcc.admits(witness)
    assert_verified(encode_lcc_subset(lcc), (witness,))


def test_gadget_demands_stay_inside_the_vertex_range():
    mc, _ = random_multicolored_clique(2, 3, 5, seed=4)
    lcc = build_clique_gadget(mc).lcc
    assert all(d.max is None or d.max <= lcc.graph.n - 1 for d in lcc.demands)


def test_two_class_round_trip_through_solvers():
    mc, clique = random_multicolored_clique(2, 2, 1, planted=True, seed=3)
    gadget = build_clique_gadget(mc)
    lcc = gadget.lcc
    inst = encode_lcc_subset(lcc)
    assert lcc_from_instance(inst).demands == lcc.demands
    result = solve_xp(inst)
    assert result.satisfiable
    assert lcc.admits(result.assignment[0])
    chosen = solve_lcc_by_multicover(lcc)
    assert chosen is not None and lcc.admits(chosen)


@pytest.mark.parametrize("seed", range(100))
def test_gadget_is_solvable_exactly_when_a_clique_exists(seed):
    rng = random.Random(seed)
    n = 1 + seed % 3
    m = rng.randint(1, min(n * n, 2 if n == 3 else 4))
    planted = rng.random() < 0.5
    mc, _ = random_multicolored_clique(3, n, m, planted=planted, seed=seed)
    clique = has_multicolored_clique(mc)
    gadget = build_clique_gadget(mc)
    lcc = gadget.lcc
    chosen = solve_lcc_by_multicover(lcc)
    assert (chosen is not None) == (clique is not None)
    if chosen is None:
        return
    assert_verified(encode_lcc_subset(lcc), (chosen,))
    picked = [mc.classes[a][len(chosen & set(block)) - 1] for a, block in enumerate(gadget.s_blocks)]
    g = mc.graph
    assert all(v in g.neighbor_set(u) for u, v in itertools.combinations(picked, 2))
    assert lcc.admits(gadget.witness(clique))


def test_no_edges_no_clique():
    mc, _ = random_multicolored_clique(2, 2, 0, seed=0)
    assert has_multicolored_clique(mc) is None
    lcc = build_clique_gadget(mc).lcc
    assert solve_lcc_by_multicover(lcc) is None


def test_lcc_from_instance_needs_the_plain_shape(c4_instance):
    with pytest.raises(ValidationError):
        lcc_from_instance(c4_instance)


# ----------------------------------------------------------------------------
# Marker expansion
# ----------------------------------------------------------------------------

def cherry(demand):
    return LccSubsetInstance(Graph(3, [(0, 1), (0, 2)]), (demand, ZERO, ZERO), frozenset({0}))


def test_marker_expansion_layout():
    inst = lcc_to_msog(cherry(IntervalSet.point(1)))
    assert inst.n == 6
    assert inst.ell == 2
    assert inst.graph.label("M") == frozenset({3, 4, 5})
    assert inst.graph.label("B") == frozenset({1, 2})
    assert inst.graph.neighbor_set(3) == frozenset({1, 2, 4, 5})


def test_marker_expansion_preserves_solutions():
    limits = Limits(mc_work_cap=10 ** 9)
    inst = lcc_to_msog(cherry(IntervalSet.point(1)))
    assert_verified(inst, (frozenset({1}), frozenset({1})), limits)
    assert not verify_assignment(inst, (frozenset({1, 2}), frozenset({1, 2})), limits)[0]
    assert not verify_assignment(inst, (frozenset({1}), frozenset({2})), limits)[0]
    assert not verify_assignment(inst, (frozenset({0}), frozenset()), limits)[0]
    result = brute_force_solve(inst, limits)
    assert result.satisfiable
    chosen, selected = result.assignment
    assert chosen == selected and len(chosen) == 1


def test_marker_expansion_needs_gadget_shape():
    path = Graph(3, [(0, 1), (1, 2)])
    with pytest.raises(ShapeViolation):
        lcc_to_msog(LccSubsetInstance(path, (ZERO, ZERO, ZERO), frozenset({0, 1})))
    with pytest.raises(ShapeViolation):
        lcc_to_msog(LccSubsetInstance(path, (ZERO, ZERO, IntervalSet.point(1)), frozenset({1})))


# ----------------------------------------------------------------------------
# Set multicover
# ----------------------------------------------------------------------------

def test_multicover_finds_the_unique_vector():
    smc = SetMulticoverInstance(2, (IntervalSet.point(2), IntervalSet.point(1)),
                                (frozenset({0}), frozenset({0, 1})), 2)
    assert solve_set_multicover(smc) == (1, 1)
    assert smc.accepts((1, 1))
    assert not smc.accepts((0, 2))


def test_multicover_respects_bounds():
    smc = SetMulticoverInstance(1, (IntervalSet.full(),), (frozenset({0}), frozenset({0})), 3, (1, 1))
    assert solve_set_multicover(smc) is None


def test_multicover_node_cap():
    smc = SetMulticoverInstance(1, (IntervalSet.point(7),), (frozenset({0}),) * 3, 7)
    with pytest.raises(ResourceLimit):
        solve_set_multicover(smc, Limits(multicover_cap=1))


def test_uncovered_element_needs_zero():
    smc = SetMulticoverInstance(2, (IntervalSet.full(), IntervalSet.point(1)), (frozenset({0}),), 1)
    assert solve_set_multicover(smc) is None


def test_multicover_family_from_uniform_types():
    g = star_graph(2)
    lcc = LccSubsetInstance(g, (IntervalSet.point(2), ZERO, ZERO))
    family = lcc_to_set_multicover(lcc)
    assert [smc.r for smc in family] == [0, 1, 2, 3]
    assert family[0].bounds is not None and sorted(family[0].bounds) == [1, 2]
    assert solve_lcc_by_multicover(lcc) == frozenset({1, 2})


def test_multicover_needs_uniform_independent_types():
    with pytest.raises(NonUniform):
        lcc_to_set_multicover(LccSubsetInstance(edgeless_graph(2), (ZERO, IntervalSet.point(1))))
    with pytest.raises(ValidationError):
        lcc_to_set_multicover(LccSubsetInstance(complete_graph(2), (ZERO, ZERO)))


def test_multicover_text_format():
    smc = SetMulticoverInstance(2, (IntervalSet.point(2), IntervalSet.range(0, 1)),
                                (frozenset({0}), frozenset({0, 1})), 2, (1, 3))
    lines = format_set_multicover(smc).splitlines()
    assert lines[:2] == ["u 2", "r 2"]
    assert "f 2 1 2" in lines
    assert "b 2 3" in lines
