from fractions import Fraction

import pytest

from msoext_cli.core.graph import format_graph
from msoext_cli.logic.constraints import IntervalSet
from msoext_cli.logic.formula import Card, walk
from msoext_cli.logic.instance import (
    Fragment, SolveResult, Status, check_fragment, format_instance, fragment_of,
    parse_instance, read_instance, write_instance,
)
from msoext_cli.problems.generators import path_graph
from msoext_cli.utils.exceptions import ParseError, UnknownGlobalConstraint, ValidationError


def test_sections_are_read(c4_instance):
    inst = c4_instance
    assert inst.n == 4 and inst.ell == 1
    assert inst.graph.m == 4
    assert [gc.cid for gc in inst.global_constraints] == ["r1"]
    assert inst.global_constraints[0].coeffs == (Fraction(1),)
    assert inst.fragment == Fragment.GL_LIN


def test_unreferenced_global_is_conjoined(c4_instance):
    assert c4_instance.formula.cards == frozenset({"r1"})
    assert Card("r1") in list(walk(c4_instance.formula.body))


def test_locals_defaults_and_overrides(c4_instance):
    lmap = c4_instance.local_constraints
    assert lmap.get(0, 0).allowed == IntervalSet.range(0, 1)
    assert lmap.get(0, 1).allowed == IntervalSet.point(0)
    assert len(list(lmap.constraints())) == 4


def test_weights_with_override(c4_instance):
    assert c4_instance.weight(0, 0) == 1
    assert c4_instance.weight(0, 2) == 5
    assert c4_instance.has_weights
    assert c4_instance.assignment_weight((frozenset({0, 2}),)) == 6


def test_conditional_local_line():
    text = "[graph]\np 2 1\ne 1 2\n[formula]\nfree X1, X2 : true\n[locals]\nc 1 * 2 0 *\n"
    lc = parse_instance(text).local_constraints.get(0, 1)
    assert lc.condition == 1
    assert lc.allowed == IntervalSet.point(0)
    assert lc.allowed_out == IntervalSet.full()


def test_graph_from_relative_path(tmp_path):
    (tmp_path / "p3.gr").write_text(format_graph(path_graph(3)))
    (tmp_path / "inst.msoi").write_text("[graph] p3.gr\n[formula]\nexists x (x in X1)\n")
    inst = read_instance(tmp_path / "inst.msoi")
    assert inst.n == 3 and inst.graph.m == 2


def test_missing_graph_file(tmp_path):
    with pytest.raises(ParseError):
        parse_instance("[graph]\nnothere.gr\n[formula]\ntrue\n", base_dir=tmp_path)


def test_missing_formula_section():
    with pytest.raises(ParseError):
        parse_instance("[graph]\np 1 0\n")


def test_line_before_any_section():
    with pytest.raises(ParseError) as err:
        parse_instance("p 1 0\n[formula]\ntrue\n")
    assert err.value.line == 1


def test_local_vertex_out_of_range():
    with pytest.raises(ParseError):
        parse_instance("[graph]\np 2 0\n[formula]\nexists x (x in X1)\n[locals]\na 1 3 0\n")


def test_local_variable_out_of_range():
    with pytest.raises(ParseError):
        parse_instance("[graph]\np 2 0\n[formula]\nexists x (x in X1)\n[locals]\na 2 1 0\n")


def test_weight_must_be_integer():
    with pytest.raises(ParseError):
        parse_instance("[graph]\np 2 0\n[formula]\nexists x (x in X1)\n[weights]\nw 1 1 x\n")


def test_undeclared_card_reference():
    with pytest.raises(UnknownGlobalConstraint):
        parse_instance("[graph]\np 2 0\n[formula]\n#card(q) & exists x (x in X1)\n")


def test_global_reading_missing_variable():
    text = "[graph]\np 2 0\n[formula]\nexists x (x in X1)\n[globals]\ng r linear 1 1 <= 1\n"
    with pytest.raises(ParseError):
        parse_instance(text)


def test_linear_fragment_rejects_oracle():
    text = ("[graph]\np 2 0\n[formula]\nexists x (x in X1)\n[globals]\ng s prime 1\n"
            "[fragment]\ng-lin\n")
    with pytest.raises(ValidationError):
        parse_instance(text)


def test_fair_fragment_rejects_lower_bounds():
    text = "[graph]\np 2 1\ne 1 2\n[formula]\nexists x (x in X1)\n[locals]\na 1 * 1..2\n[fragment]\nfair\n"
    with pytest.raises(ValidationError):
        parse_instance(text)


def test_fragment_inference(c4_instance, c4_without_locals):
    assert fragment_of(c4_instance) == Fragment.GL_LIN
    assert fragment_of(c4_without_locals) == Fragment.G_LIN
    assert check_fragment(c4_without_locals, Fragment.G) == Fragment.G
    with pytest.raises(ValidationError):
        check_fragment(c4_instance, Fragment.G_LIN)


def test_fragment_aliases():
    assert Fragment.parse("MSO_GL_LIN") == Fragment.GL_LIN
    assert Fragment.parse("fairmso") == Fragment.FAIR
    with pytest.raises(ValidationError):
        Fragment.parse("cmso")


def test_format_then_parse_keeps_contents(c4_instance):
    again = parse_instance(format_instance(c4_instance))
    assert again.graph == c4_instance.graph
    assert again.formula == c4_instance.formula
    assert again.global_constraints == c4_instance.global_constraints
    assert dict(again.weights) == dict(c4_instance.weights)
    assert list(again.local_constraints.constraints()) == list(c4_instance.local_constraints.constraints())


def test_write_instance_with_graph_reference(tmp_path, c4_instance):
    (tmp_path / "c4.gr").write_text(format_graph(c4_instance.graph))
    write_instance(c4_instance, tmp_path / "c4.msoi", graph_path="c4.gr")
    assert "c4.gr" in (tmp_path / "c4.msoi").read_text()
    again = read_instance(tmp_path / "c4.msoi")
    assert again.graph == c4_instance.graph
    assert again.fragment == c4_instance.fragment


def test_solve_result_weight(c4_instance):
    result = SolveResult.sat(c4_instance, [[1, 3]], solver="test")
    assert result.status == Status.SAT and result.satisfiable
    assert result.assignment == (frozenset({1, 3}),)
    assert result.weight == 2
    assert not SolveResult.unsat().satisfiable
