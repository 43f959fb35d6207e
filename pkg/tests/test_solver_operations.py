import json

import pytest

from msoext_cli.core.graph import Graph
from msoext_cli.eval.oracle import brute_force_solve
from msoext_cli.logic.instance import Fragment, SolveResult, build_instance
from msoext_cli.solver_operations import PATH_RESULTS, RunReport, SolverOperations, solve_fair
from msoext_cli.utils.exceptions import ValidationError, WitnessRejected

DOMINATING = "free D : forall x (x in D | exists y (y in D & edge(x, y)))"


def star(leaves):
    return Graph(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def test_parameters_of_c4(c4_instance):
    params = SolverOperations(c4_instance).parameters()
    assert params == {"n": 4, "m": 4, "ell": 1, "nu": 2, "tw": 2, "globals": 1}


def test_auto_prefers_neighborhood_diversity_on_c4(c4_instance):
    ops = SolverOperations(c4_instance)
    assert ops.choose_path() == "nd-fpt"
    assert ops.choose_path("tw") == "tw"
    assert ops.choose_path("nd", oracle=True) == "oracle"


def test_auto_takes_treewidth_on_a_long_path():
    # a path has treewidth 1 and many neighborhood types
    g = Graph(8, [(v, v + 1) for v in range(7)])
    inst = build_instance(g, DOMINATING)
    ops = SolverOperations(inst)
    assert ops.parameters()["tw"] == 1
    assert ops.parameters()["nu"] > 2
    assert ops.choose_path() == "tw"


def test_nonlinear_fragment_takes_the_xp_path(c4_instance):
    from msoext_cli.logic.constraints import OracleConstraint
    inst = build_instance(c4_instance.graph, "exists x (x in X1)", [OracleConstraint("p", "prime", (0,))])
    assert SolverOperations(inst).choose_path("nd") == "nd-xp"


def test_unknown_parameter(c4_instance):
    with pytest.raises(ValidationError):
        SolverOperations(c4_instance).choose_path("cw")


def test_fragment_mismatch_is_rejected(c4_instance):
    with pytest.raises(ValidationError):
        SolverOperations(c4_instance).choose_path(fragment=Fragment.G_LIN)


@pytest.mark.parametrize("param,oracle", [("nd", False), ("tw", False), ("auto", True)])
def test_every_path_reports_the_same_optimum(c4_instance, param, oracle):
    report = SolverOperations(c4_instance).solve(param, oracle=oracle)
    assert report.verdict == "SAT"
    assert report.weight == 2
    assert report.witness == [[2, 4]]


def test_report_json_is_stable(c4_instance):
    report = SolverOperations(c4_instance).solve("nd")
    data = json.loads(report.to_json())
    assert "timings" not in data
    assert data["result"] == PATH_RESULTS["nd-fpt"]
    assert "solve" in json.loads(report.to_json(with_timings=True))["timings"]


def test_unsat_report_has_no_witness(c4_instance):
    from msoext_cli.logic.constraints import LinearConstraint
    inst = build_instance(c4_instance.graph, "forall x, y (x in X1 & y in X1 -> !edge(x, y))",
                          [LinearConstraint("r", (1,), ">=", 3)])
    report = SolverOperations(inst).solve()
    assert report.verdict == "UNSAT"
    assert report.witness is None and report.weight is None


def test_bad_witness_is_rejected(c4_instance):
    bad = SolveResult.sat(c4_instance, [[0, 1]])
    with pytest.raises(WitnessRejected):
        SolverOperations(c4_instance).verify(c4_instance, bad)


def test_unsat_needs_no_verification(c4_instance):
    SolverOperations(c4_instance).verify(c4_instance, SolveResult.unsat())


def test_solve_fair_on_a_star():
    inst = build_instance(star(3), DOMINATING)
    value, result = solve_fair(inst, brute_force_solve, 1)
    assert value == 1
    assert result.satisfiable
    d = result.assignment[0]
    assert max(len(inst.graph.neighbor_set(v) & d) for v in range(inst.n)) == 1


def test_solve_fair_without_any_model():
    inst = build_instance(star(2), "exists x (x in X1 & !(x in X1))")
    value, result = solve_fair(inst, brute_force_solve, 1)
    assert value is None
    assert result.unsat


def test_solve_fair_rejects_variable_index():
    inst = build_instance(star(2), DOMINATING)
    with pytest.raises(ValidationError):
        solve_fair(inst, brute_force_solve, 2)


def test_fair_run_reports_the_objective():
    inst = build_instance(star(3), DOMINATING)
    report = SolverOperations(inst).solve("nd", fair=1)
    assert report.fair == 1
    assert report.verdict == "SAT"


def test_report_dict_omits_unset_fields():
    report = RunReport("UNSAT", "oracle", {"n": 0})
    assert set(report.as_dict()) == {"verdict", "path", "result", "parameters", "details"}
