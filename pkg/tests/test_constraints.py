import itertools
import random
from fractions import Fraction

import pytest

from msoext_cli.logic.constraints import (
    IntervalSet, LinearConstraint, LocalConstraint, LocalConstraintMap, ModCountConstraint,
    OracleConstraint, PreEvaluation, TableConstraint, compliance_check, eval_global, parse_global,
)
from msoext_cli.utils.exceptions import OracleFailure, ParseError


def test_interval_set_parse_and_membership():
    s = IntervalSet.parse("0..3,5,7..*")
    assert [x for x in range(12) if x in s] == [0, 1, 2, 3, 5, 7, 8, 9, 10, 11]
    assert s.format() == "0..3,5,7..*"
    assert not s.is_interval
    assert IntervalSet.parse("{}").is_empty
    assert IntervalSet.parse("*") == IntervalSet.full()


def test_interval_set_merges_adjacent_pieces():
    assert IntervalSet.parse("0..2,3,4..5") == IntervalSet.range(0, 5)
    assert IntervalSet.parse("2..*,0..4") == IntervalSet.range(0, None)


def test_interval_intersection():
    a = IntervalSet.range(0, 3)
    b = IntervalSet.range(2, 5)
    assert a.intersect(b) == IntervalSet.range(2, 3)
    assert IntervalSet.point(4).intersect(a).is_empty
    assert IntervalSet.range(3, None).intersect(IntervalSet.parse("0..1,5..6")) == IntervalSet.range(5, 6)


def test_interval_covers():
    assert IntervalSet.full().covers(0, 7)
    assert not IntervalSet.range(0, 2).covers(0, 3)
    assert IntervalSet.parse("0..1,2..3").covers(0, 3)


def test_bad_interval_text():
    with pytest.raises(ParseError):
        IntervalSet.parse("1..x")


def test_linear_constraint_exact():
    geq = LinearConstraint("r", (Fraction(1), Fraction(-1)), ">=", Fraction(0))
    assert eval_global(geq, (3, 3))
    assert not eval_global(geq, (2, 3))
    third = LinearConstraint("h", (Fraction(1, 3),), "=", Fraction(1))
    assert eval_global(third, (3,))
    assert not eval_global(third, (2,))


@pytest.mark.parametrize("seed", range(5))
def test_linear_matches_rational_arithmetic_exhaustively(seed):
    rng = random.Random(seed)
    ell = rng.randint(1, 3)
    coeffs = tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(ell))
    bound = Fraction(rng.randint(-6, 6), rng.randint(1, 2))
    sense = rng.choice(["<=", "=", ">="])
    gc = LinearConstraint("r", coeffs, sense, bound)
    for sizes in itertools.product(range(9), repeat=ell):
        lhs = sum(a * s for a, s in zip(coeffs, sizes))
        expected = {"<=": lhs <= bound, "=": lhs == bound, ">=": lhs >= bound}[sense]
        assert eval_global(gc, sizes) == expected


def test_square_oracle():
    gc = OracleConstraint("sq", "geq_square", (0, 1))
    assert eval_global(gc, (9, 3))
    assert not eval_global(gc, (8, 3))


def test_other_oracles():
    assert eval_global(OracleConstraint("p", "prime", (0,)), (7,))
    assert not eval_global(OracleConstraint("p", "prime", (0,)), (9,))
    assert eval_global(OracleConstraint("m", "member", (0, 2, 5)), (5,))
    assert eval_global(OracleConstraint("l", "leq_product", (0, 1, 2)), (6, 2, 3))


def test_oracle_failure_on_missing_size():
    with pytest.raises(OracleFailure):
        eval_global(OracleConstraint("sq", "geq_square", (0, 4)), (1, 2))


def test_mod_count():
    assert eval_global(ModCountConstraint("odd", 1, 2), (3,))
    assert not eval_global(ModCountConstraint("odd", 1, 2), (4,))


def test_table_constraint():
    gc = TableConstraint("t", frozenset({(1, 2), (0, 0)}))
    assert eval_global(gc, (1, 2))
    assert not eval_global(gc, (2, 1))


def test_parse_global_forms():
    lin = parse_global(["r", "linear", "1", "-1/2", "<=", "3"])
    assert lin.coeffs == (Fraction(1), Fraction(-1, 2)) and lin.bound == 3
    assert parse_global(["t", "table", "(1,2)", "(3,4)"]).tuples == frozenset({(1, 2), (3, 4)})
    assert parse_global(["m", "mod", "1", "3", "2"]) == ModCountConstraint("m", 1, 3, 1)
    assert parse_global(["s", "geq_square", "1", "2"]) == OracleConstraint("s", "geq_square", (0, 1))
    with pytest.raises(ParseError):
        parse_global(["x", "cubic", "1"])
    with pytest.raises(ParseError):
        parse_global(["r", "linear", "1", "<>", "3"])


def test_compliance():
    r = LinearConstraint("r", (Fraction(1),), "<=", Fraction(2))
    assert compliance_check((1,), PreEvaluation.of({"r": True}), [r])
    assert not compliance_check((1,), PreEvaluation.of({"r": False}), [r])


@pytest.mark.parametrize("seed", range(5))
def test_compliance_is_conjunction_of_verdicts(seed):
    rng = random.Random(seed)
    r1 = LinearConstraint("a", (Fraction(1), Fraction(-1)), "<=", Fraction(rng.randint(-2, 2)))
    r2 = OracleConstraint("b", "geq_square", (0, 1))
    for _ in range(30):
        sizes = (rng.randint(0, 6), rng.randint(0, 6))
        beta = PreEvaluation.of({"a": rng.random() < 0.5, "b": rng.random() < 0.5})
        expected = eval_global(r1, sizes) == beta["a"] and eval_global(r2, sizes) == beta["b"]
        assert compliance_check(sizes, beta, [r1, r2]) == expected


def test_conditional_local_constraint():
    lc = LocalConstraint(IntervalSet.range(0, 1), condition=1, allowed_out=IntervalSet.range(2, None))
    assert lc.admits(1, True)
    assert not lc.admits(1, False)
    assert lc.admits(3, False)
    assert not lc.is_interval
    assert not lc.is_trivial(4)


def test_local_map_defaults_and_entries():
    lmap = LocalConstraintMap(2, 3, (LocalConstraint(IntervalSet.point(0)), None),
                              {(0, 2): LocalConstraint(IntervalSet.range(1, 2))})
    assert lmap.get(0, 0).allowed == IntervalSet.point(0)
    assert lmap.get(0, 2).allowed == IntervalSet.range(1, 2)
    assert lmap.get(1, 1).allowed == IntervalSet.full()
    assert not lmap.is_declared(1, 1)
    assert len(list(lmap.constraints())) == 3
    fair = lmap.restricted(1, IntervalSet.range(0, 1))
    assert fair.get(1, 0).allowed == IntervalSet.range(0, 1)
