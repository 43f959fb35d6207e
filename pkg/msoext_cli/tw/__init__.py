"""
Solver parameterized by treewidth: predicate automata, the CSP encoding and the driver.
"""
from .automaton import PredicateSpec, TreeAutomaton, compile_formula, compile_predicate_automaton, recognize_predicates
from .encoder import EncodedInstance, TwEncoder, encode_instance, hard_instance
from .solver import solve_tw

__all__ = [
    'EncodedInstance', 'PredicateSpec', 'TreeAutomaton', 'TwEncoder', 'compile_formula',
    'compile_predicate_automaton', 'encode_instance', 'hard_instance', 'recognize_predicates', 'solve_tw',
]
