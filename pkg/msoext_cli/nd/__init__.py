"""
Solvers parameterized by neighborhood diversity.
"""
from .fpt import check_linear_fragment, solve_fpt_lin
from .ilp import IlpInstance, IlpSolver, build_ilp, solve_ilp
from .refine import refine_type, refine_uniform
from .xp import (
    ExtendedNumericalAssignment, enumerate_sigma, possibly_satisfied, sigma_models, solve_xp,
)

__all__ = [
    'ExtendedNumericalAssignment', 'IlpInstance', 'IlpSolver', 'build_ilp', 'check_linear_fragment',
    'enumerate_sigma', 'possibly_satisfied', 'refine_type', 'refine_uniform', 'sigma_models',
    'solve_fpt_lin', 'solve_ilp', 'solve_xp',
]
