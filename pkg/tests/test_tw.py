import itertools
import random

import pytest

from msoext_cli.core.graph import Graph
from msoext_cli.core.treedecomp import heuristic_tree_decomposition, make_nice, validate_tree_decomposition
from msoext_cli.csp.extension import check_extension, projected_solutions
from msoext_cli.csp.freuder import freuder_solve
from msoext_cli.csp.instance import constraint_graph
from msoext_cli.eval.naive import mask_connected, mc_naive
from msoext_cli.eval.oracle import brute_force_solve, verify_assignment
from msoext_cli.logic.constraints import (
    IntervalSet, LinearConstraint, LocalConstraint, LocalConstraintMap, PreEvaluation,
)
from msoext_cli.logic.formula import TRUE, residues
from msoext_cli.logic.instance import build_instance
from msoext_cli.logic.parser import parse_formula
from msoext_cli.problems.generators import cycle_graph, path_graph, random_graph, random_tree, star_graph
from msoext_cli.tw.automaton import compile_formula, recognize_predicates
from msoext_cli.tw.encoder import encode_instance, hard_instance
from msoext_cli.tw.solver import solve_tw
from msoext_cli.utils.exceptions import UnsupportedPredicate, ValidationError

INDEPENDENT = "free X1 : forall x, y (x in X1 & y in X1 -> !edge(x, y))"
DOMINATING = "free X1 : forall x (x in X1 | exists y (y in X1 & edge(x, y)))"
VERTEX_COVER = "free X1 : forall x, y (edge(x, y) -> (x in X1 | y in X1))"
PARTITION = "free X1, X2 : forall x ((x in X1 | x in X2) & !(x in X1 & x in X2))"
TWO_COLORING = PARTITION + " & forall x, y (x in X1 & y in X1 -> !edge(x, y))" \
    " & forall x, y (x in X2 & y in X2 -> !edge(x, y))"

LIBRARY_FORMULAS = [
    INDEPENDENT,
    DOMINATING,
    VERTEX_COVER,
    "free X1 : exists x (x in X1) & connected(X1)",
    "free X1 : forall x !(x in X1)",
    PARTITION,
    "free X1, X2 : forall x (x in X1 -> x in X2) & exists y (y in X1)",
    "free X1, X2 : forall x (x in X1 <-> x in X2)",
    TWO_COLORING,
]


def nice(g):
    return make_nice(g, heuristic_tree_decomposition(g))


def test_independent_set_formula_is_one_predicate():
    f = parse_formula(INDEPENDENT)
    assert [str(s) for s in recognize_predicates(f.body, f.free_vars)] == ["independent(X1)"]


def test_partition_splits_into_cover_and_disjointness():
    f = parse_formula(PARTITION)
    names = sorted(s.name for s in recognize_predicates(f.body, f.free_vars))
    assert names == ["covers", "disjoint"]


def test_bound_variable_names_do_not_matter():
    f = parse_formula("free D : forall u (exists w (edge(w, u) & w in D) | u in D)")
    assert [s.name for s in recognize_predicates(f.body, f.free_vars)] == ["dominating"]


def test_true_has_no_predicates():
    assert recognize_predicates(TRUE, ("X1",)) == []


def test_equality_is_outside_the_library():
    f = parse_formula("free X1 : forall x, y (x in X1 & y in X1 -> x = y)")
    with pytest.raises(UnsupportedPredicate):
        recognize_predicates(f.body, f.free_vars)


@pytest.mark.parametrize("text", LIBRARY_FORMULAS)
@pytest.mark.parametrize("seed", range(3))
def test_automaton_agrees_with_model_checking(text, seed):
    g = random_graph(5, 0.45, seed)
    ntd = nice(g)
    f = parse_formula(text)
    aut = compile_formula(f.body, f.free_vars, g)
    for masks in itertools.product(range(1 << g.n), repeat=f.ell):
        assert aut.run(ntd, g, masks) == mc_naive(g, f, masks), masks


@pytest.mark.parametrize("g", [path_graph(6), cycle_graph(6), star_graph(5), random_tree(7, 4),
                               random_graph(7, 0.3, 2), Graph(5, [(0, 1), (3, 4)])])
def test_connectivity_automaton_matches_search(g):
    f = parse_formula("free X1 : connected(X1)")
    aut = compile_formula(f.body, f.free_vars, g)
    ntd = nice(g)
    for mask in range(1 << g.n):
        assert aut.run(ntd, g, [mask]) == mask_connected(g, mask), bin(mask)


def test_independent_rejects_two_vertices_of_a_triangle():
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    f = parse_formula(INDEPENDENT)
    aut = compile_formula(f.body, f.free_vars, g)
    ntd = nice(g)
    assert aut.run(ntd, g, [0b001])
    assert not any(aut.run(ntd, g, [m]) for m in (0b011, 0b101, 0b110, 0b111))


def _encode(inst, beta=None, residue=None, automaton=True):
    ntd = nice(inst.graph)
    if beta is None:
        beta, residue = next(iter(residues(inst.formula)))
    aut = compile_formula(residue, inst.formula.free_vars, inst.graph) if automaton else None
    return ntd, encode_instance(inst, ntd, beta, residue, aut)


def _y_ids(inst):
    return list(range(inst.ell * inst.n))


def test_single_vertex_count():
    g = Graph(1)
    inst = build_instance(g, "free X1 : true", [LinearConstraint("r1", (1,), ">=", 0)])
    ntd, enc = _encode(inst)
    pinned = enc.csp.restricted({enc.y(0, 0): 1})
    solution = freuder_solve(pinned, enc.td)
    assert solution.assignment[enc.registry[("s", ntd.root, 0)]] == 1


@pytest.mark.parametrize("seed", range(8))
def test_counters_track_sizes_and_neighbourhoods(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(3, 7), 0.4, seed)
    mask = rng.randrange(1 << g.n)
    counts = {v: bin(g.adj_mask[v] & mask).count("1") for v in range(g.n)}
    lmap = LocalConstraintMap(1, g.n, entries={(0, v): LocalConstraint(IntervalSet.point(c))
                                                for v, c in counts.items()})
    inst = build_instance(g, "free X1 : true", [LinearConstraint("r1", (1,), ">=", 0)], lmap)
    ntd, enc = _encode(inst)
    pins = {enc.y(0, v): mask >> v & 1 for v in range(g.n)}
    solution = freuder_solve(enc.csp.restricted(pins), enc.td)
    assert solution.assignment[enc.registry[("s", ntd.root, 0)]] == bin(mask).count("1")
    for v in range(g.n):
        top = ntd.top(v)
        key = ("lam", top, v, 0)
        if g.neighbors(v):
            in_bag = sum(mask >> u & 1 for u in g.neighbor_set(v) & ntd.bags[top])
            assert solution.assignment[enc.registry[key]] + in_bag == counts[v]
        else:
            assert key not in enc.registry


def test_star_center_counts_its_leaves():
    g = star_graph(3)
    lmap = LocalConstraintMap(1, 4, entries={(0, 0): LocalConstraint(IntervalSet.point(3))})
    inst = build_instance(g, "free X1 : true", local_constraints=lmap)
    ntd, enc = _encode(inst)
    feasible = projected_solutions(enc.csp, _y_ids(inst))
    assert feasible == {(0, 1, 1, 1), (1, 1, 1, 1)}


@pytest.mark.parametrize("value, expected", [(True, {(0,), (1,), (2,)}), (False, {(3,), (4,)})])
def test_global_relation_or_its_complement_at_the_root(value, expected):
    inst = build_instance(path_graph(4), "free X1 : true", [LinearConstraint("r1", (1,), "<=", 2)])
    ntd, enc = _encode(inst, PreEvaluation.of({"r1": value}), TRUE)
    root_count = enc.registry[("s", ntd.root, 0)]
    assert projected_solutions(enc.csp, [root_count]) == expected


def test_independent_sets_of_c4():
    inst = build_instance(cycle_graph(4), INDEPENDENT)
    _, enc = _encode(inst)
    assert len(projected_solutions(enc.csp, _y_ids(inst))) == 7


def test_ordered_partitions_of_p3():
    inst = build_instance(path_graph(3), PARTITION)
    _, enc = _encode(inst)
    assert len(projected_solutions(enc.csp, _y_ids(inst))) == 8


def test_trivial_automaton_adds_no_restriction():
    inst = build_instance(path_graph(3), "free X1 : true")
    _, enc = _encode(inst)
    assert not any(key[0] == "q" for key in enc.registry)
    assert len(projected_solutions(enc.csp, _y_ids(inst))) == 8


def test_c4_instance_is_an_extension_per_pre_evaluation(c4_instance):
    for beta, residue in residues(c4_instance.formula):
        _, enc = _encode(c4_instance, beta, residue)
        assert check_extension(hard_instance(c4_instance, beta, residue), enc.csp, _y_ids(c4_instance))


@pytest.mark.parametrize("automaton", [True, False])
@pytest.mark.parametrize("seed", range(4))
def test_encodings_extend_the_witness_set(seed, automaton):
    rng = random.Random(seed)
    g = random_graph(5, 0.5, seed)
    lmap = LocalConstraintMap(2, 5, defaults=(LocalConstraint(IntervalSet.range(0, 1)), None),
                              entries={(1, 2): LocalConstraint(IntervalSet.range(1, None), 0, IntervalSet.full())})
    globals_ = [LinearConstraint("bal", (1, -1), "<=", rng.randint(0, 2))]
    inst = build_instance(g, "free X1, X2 : forall x !(x in X1 & x in X2)", globals_, lmap)
    for beta, residue in residues(inst.formula):
        _, enc = _encode(inst, beta, residue, automaton)
        assert check_extension(hard_instance(inst, beta, residue), enc.csp, _y_ids(inst))


def _group_bound(inst, ntd):
    # own counters and state, plus the left child's copies at a join
    return 2 * (inst.ell * (ntd.width + 2) + 1)


@pytest.mark.parametrize("seed", range(30))
def test_augmented_width_stays_within_two_groups(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 8)
    g = random_graph(n, 0.4, seed)
    lmap = LocalConstraintMap(1, n, defaults=(LocalConstraint(IntervalSet.range(0, 2)),))
    inst = build_instance(g, DOMINATING, [LinearConstraint("r1", (1,), "<=", 4)], lmap)
    ntd, enc = _encode(inst)
    assert enc.extras_per_node <= _group_bound(inst, ntd)
    assert enc.td.width <= enc.base_width + 2 * enc.extras_per_node
    assert validate_tree_decomposition(constraint_graph(enc.csp), enc.td) == (True, None)


def test_star_with_local_and_global_counts_keeps_two_groups_per_bag():
    g = star_graph(4)
    lmap = LocalConstraintMap(1, 5, defaults=(LocalConstraint(IntervalSet.range(0, 2)),))
    inst = build_instance(g, DOMINATING, [LinearConstraint("r1", (1,), "<=", 4)], lmap)
    ntd, enc = _encode(inst)
    assert enc.td.width <= enc.base_width + 2 * enc.extras_per_node
    assert enc.extras_per_node <= _group_bound(inst, ntd)
    owner = {vid: key[1] for key, vid in enc.registry.items() if key[0] != "y"}
    for a, bag in enumerate(enc.td.bags):
        assert {owner[x] for x in bag if x in owner} <= {a, enc.td.parent[a]}


def _random_case(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 6)
    g = random_graph(n, 0.45, seed)
    kind = seed % 5
    if kind == 0:
        return build_instance(g, INDEPENDENT, [LinearConstraint("r1", (1,), ">=", 2)],
                              weights={(0, v): rng.randint(-3, 5) for v in range(n)})
    if kind == 1:
        return build_instance(g, DOMINATING, weights={(0, v): rng.randint(1, 4) for v in range(n)})
    if kind == 2:
        lmap = LocalConstraintMap(1, n, defaults=(LocalConstraint(IntervalSet.range(0, 2)),))
        return build_instance(g, "free X1 : exists x (x in X1) & connected(X1)",
                              [LinearConstraint("r1", (1,), ">=", 3)], lmap)
    if kind == 3:
        return build_instance(g, TWO_COLORING, [LinearConstraint("bal", (1, -1), "=", 0)],
                              weights={(1, v): 1 for v in range(n)})
    lmap = LocalConstraintMap(1, n, defaults=(LocalConstraint(IntervalSet.range(0, 1), 0, IntervalSet.full()),))
    return build_instance(g, VERTEX_COVER, local_constraints=lmap,
                          weights={(0, v): rng.randint(1, 3) for v in range(n)})


@pytest.mark.parametrize("seed", range(300))
def test_treewidth_solver_matches_brute_force(seed):
    inst = _random_case(seed)
    expected = brute_force_solve(inst)
    got = solve_tw(inst)
    assert got.status == expected.status
    if got.satisfiable:
        assert verify_assignment(inst, got.assignment) == (True, None)
        assert got.weight == expected.weight


@pytest.mark.parametrize("seed", [0, 1, 2, 4, 5, 6])
def test_bruteforce_backend_matches(seed):
    inst = _random_case(seed)
    got = solve_tw(inst, backend="bruteforce")
    assert got.weight == brute_force_solve(inst).weight


def test_formulas_outside_the_library_need_the_bruteforce_backend():
    inst = build_instance(path_graph(4), "free X1 : forall x, y (x in X1 & y in X1 -> x = y) & exists z (z in X1)")
    with pytest.raises(UnsupportedPredicate):
        solve_tw(inst)
    got = solve_tw(inst, backend="bruteforce")
    assert got.satisfiable and len(got.assignment[0]) == 1


def test_parallel_pre_evaluations_give_the_same_optimum():
    inst = _random_case(10)
    assert solve_tw(inst, jobs=3).weight == solve_tw(inst).weight


def test_unknown_backend():
    with pytest.raises(ValidationError):
        solve_tw(build_instance(path_graph(2), "free X1 : true"), backend="lp")


def test_emitted_csp_dump(tmp_path):
    target = tmp_path / "tw.csp"
    solve_tw(build_instance(cycle_graph(4), INDEPENDENT), emit_csp=target)
    assert target.read_text().startswith("[vars]")
