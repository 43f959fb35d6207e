"""
MSO_1 syntax, cardinality constraints and instances.
"""
from .constraints import (
    IntervalSet, GlobalConstraint, LinearConstraint, OracleConstraint, TableConstraint,
    ModCountConstraint, LocalConstraint, LocalConstraintMap, PreEvaluation,
    eval_global, compliance_check,
)
from .formula import MSOFormula, print_formula, quantifier_counts, pre_evaluations
from .parser import parse_formula
from .instance import (
    Instance, Fragment, SolveResult, Status, fragment_of, check_fragment,
    parse_instance, read_instance, format_instance, write_instance,
)

__all__ = [
    'IntervalSet', 'GlobalConstraint', 'LinearConstraint', 'OracleConstraint',
    'TableConstraint', 'ModCountConstraint', 'LocalConstraint', 'LocalConstraintMap',
    'PreEvaluation', 'eval_global', 'compliance_check',
    'MSOFormula', 'print_formula', 'quantifier_counts', 'pre_evaluations', 'parse_formula',
    'Instance', 'Fragment', 'SolveResult', 'Status', 'fragment_of', 'check_fragment',
    'parse_instance', 'read_instance', 'format_instance', 'write_instance',
]
