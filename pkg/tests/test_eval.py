import itertools

import pytest

from msoext_cli.core.graph import Graph, nd_decomposition
from msoext_cli.eval.naive import ModelChecker, mask_connected, mc_naive, to_mask
from msoext_cli.eval.oracle import brute_force_solve, verify_assignment
from msoext_cli.eval.shapes import (
    Shape, enumerate_shapes, label_refined, representative_of_shape, shape_admissible,
    nested_signature, shape_of, shrink_assignment, shrink_graph, type_shapes,
)
from msoext_cli.logic.formula import Card, expand_connected, quantifier_counts
from msoext_cli.logic.instance import parse_instance
from msoext_cli.logic.parser import parse_formula
from msoext_cli.problems.generators import (
    complete_graph, cycle_graph, path_graph, random_cograph_like,
)
from msoext_cli.utils.config_manager import Limits
from msoext_cli.utils.exceptions import ResourceLimit, ValidationError

THREE_COLORING = parse_formula(
    "exists X1, X2, X3 ((forall x (x in X1 | x in X2 | x in X3)) & "
    "bigand i = 1..3 (forall x, y ((x in X{i} & y in X{i}) -> !edge(x, y))))"
)
INDEPENDENT = parse_formula("forall x, y (x in X1 & y in X1 -> !edge(x, y))")
DOMINATING = parse_formula("forall x (x in X1 | exists y (y in X1 & edge(x, y)))")


def test_triangle_is_three_colorable():
    assert mc_naive(complete_graph(3), THREE_COLORING, [])


def test_k4_is_not_three_colorable():
    assert not mc_naive(complete_graph(4), THREE_COLORING, [])


def test_free_set_assignment():
    g = cycle_graph(4)
    assert mc_naive(g, INDEPENDENT, [{0, 2}])
    assert not mc_naive(g, INDEPENDENT, [{0, 1}])
    assert mc_naive(g, INDEPENDENT, [to_mask([1, 3])])


def test_assignment_arity_is_checked():
    with pytest.raises(ValidationError):
        mc_naive(path_graph(2), INDEPENDENT, [])


def test_card_atom_is_rejected():
    with pytest.raises(ValidationError):
        mc_naive(path_graph(2), Card("r"), [])


def test_work_cap():
    with pytest.raises(ResourceLimit):
        mc_naive(complete_graph(6), THREE_COLORING, [], work_cap=1000)


def test_connectivity_of_masks():
    g = path_graph(4)
    assert mask_connected(g, 0)
    assert mask_connected(g, to_mask([1, 2, 3]))
    assert not mask_connected(g, to_mask([0, 2]))


def test_connected_atom_matches_expansion():
    g = cycle_graph(5)
    short = parse_formula("connected(X1)")
    long = expand_connected(short.body)
    checker = ModelChecker(g)
    for mask in range(1 << g.n):
        assert checker.holds(short.body, {"X1": mask}) == mask_connected(g, mask)
        assert checker.holds(long, {"X1": mask}) == mask_connected(g, mask)


def test_shape_caps_counts():
    g = complete_graph(5)
    nd = nd_decomposition(g)
    sh = shape_of((frozenset({0, 1}),), nd, t=2, ell=1)
    assert sh.values == ((3, 2),)
    assert sh.is_up(0, 0) and not sh.is_up(0, 1)
    assert sh.support(0, 0, True) == 2


def test_type_shapes_of_single_vertex():
    assert type_shapes(1, 0, 1) == [(0, 1), (1, 0)]


def test_unrealizable_shape_has_no_representative():
    nd = nd_decomposition(complete_graph(2))
    assert representative_of_shape(Shape(1, 1, ((1, 0),)), nd) is None


@pytest.mark.parametrize("seed", range(6))
def test_representative_has_the_shape(seed):
    g = random_cograph_like([(5, False), (3, True), (2, False)], seed=seed)
    nd = nd_decomposition(g)
    for sh in enumerate_shapes(nd, 1, 1):
        rep = representative_of_shape(sh, nd)
        assert rep is not None
        assert shape_of(rep, nd, 1, 1) == sh


def test_shape_enumeration_cap():
    nd = nd_decomposition(random_cograph_like([(4, False), (4, True)], seed=1))
    with pytest.raises(ResourceLimit):
        list(enumerate_shapes(nd, 2, 2, max_shapes=10))


@pytest.mark.parametrize("formula", [INDEPENDENT, DOMINATING])
@pytest.mark.parametrize("seed", range(3))
def test_equal_shapes_agree_and_shrinking_preserves_truth(formula, seed):
    g = random_cograph_like([(8, False), (3, True)], seed=seed, p=0.6)
    nd = nd_decomposition(g)
    t = quantifier_counts(formula.body)[2]
    shrunk = shrink_graph(g, nd, t + 1, 1)
    assert shrunk.graph.n < g.n
    checker = ModelChecker(g)
    small_checker = ModelChecker(shrunk.graph)
    verdicts = {}
    for mask in range(1 << g.n):
        part = frozenset(v for v in range(g.n) if mask >> v & 1)
        truth = mc_naive(g, formula, [part], checker=checker)
        sh = shape_of((part,), nd, t, 1)
        assert verdicts.setdefault(sh, truth) == truth
        assert shape_admissible(sh, g, nd, formula.body, formula.free_vars,
                                shrunk=shrunk, checker=small_checker) == truth
        small = shrink_assignment((part,), nd, shrunk, 1)
        assert mc_naive(shrunk.graph, formula, list(small), checker=small_checker) == truth


def test_nested_signature_sums_supersets():
    assert nested_signature([(1, 2, 3, 4)], 2) == ((10, 6, 7, 4),)


def test_label_refinement_splits_types():
    g = Graph(4, [], {"red": [0, 1]})
    nd = label_refined(g, nd_decomposition(g))
    assert sorted(nd.types) == [(0, 1), (2, 3)]


C4 = "[graph]\np 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n"


def test_brute_force_unsat_under_locals(c4_instance):
    result = brute_force_solve(c4_instance)
    assert not result.satisfiable
    assert result.details["solver"] == "bruteforce"


def test_brute_force_minimizes_weight(c4_without_locals):
    result = brute_force_solve(c4_without_locals)
    assert result.satisfiable
    assert result.assignment == (frozenset({1, 3}),)
    assert result.weight == 2


def test_brute_force_global_size():
    inst = parse_instance(C4 + "[formula]\nexists x (x in X1)\n[globals]\ng r linear 1 = 3\n")
    result = brute_force_solve(inst)
    assert result.satisfiable
    assert len(result.assignment[0]) == 3


def test_brute_force_negated_global():
    inst = parse_instance(C4 + "[formula]\n!#card(r) & exists x (x in X1)\n[globals]\ng r linear 1 >= 2\n")
    result = brute_force_solve(inst)
    assert result.satisfiable
    assert len(result.assignment[0]) == 1


def test_brute_force_cap():
    inst = parse_instance(C4 + "[formula]\nexists x (x in X1)\n")
    with pytest.raises(ResourceLimit):
        brute_force_solve(inst, Limits(brute_force_cap=3))


def test_verify_reports_reasons(c4_instance):
    ok, reason = verify_assignment(c4_instance, (frozenset({0, 2}),))
    assert not ok and "local constraint" in reason
    ok, reason = verify_assignment(c4_instance, (frozenset({0}),))
    assert not ok and "local constraint" in reason
    ok, reason = verify_assignment(c4_instance, (frozenset({0, 9}),))
    assert not ok and "outside" in reason


def test_verify_accepts_a_model(c4_without_locals):
    assert verify_assignment(c4_without_locals, (frozenset({0, 2}),)) == (True, None)
    ok, reason = verify_assignment(c4_without_locals, (frozenset({0, 1}),))
    assert not ok and "formula" in reason


@pytest.mark.parametrize("seed", range(4))
def test_brute_force_witness_verifies(seed):
    g = random_cograph_like([(2, False), (2, True), (1, False)], seed=seed)
    lines = [f"e {u + 1} {v + 1}" for u, v in g.edges()]
    text = (f"[graph]\np {g.n} {g.m}\n" + "\n".join(lines) + "\n[formula]\n"
            "forall x (x in X1 | exists y (y in X1 & edge(x, y)))\n[globals]\ng k linear 1 <= 2\n")
    inst = parse_instance(text)
    result = brute_force_solve(inst)
    if result.satisfiable:
        assert verify_assignment(inst, result.assignment)[0]
    else:
        for part in itertools.combinations(range(g.n), 2):
            assert not verify_assignment(inst, (frozenset(part),))[0]
