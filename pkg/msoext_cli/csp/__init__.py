"""
Weighted constraint satisfaction along tree decompositions.
"""
from .extension import augment_decomposition, check_extension, ilp_to_csp
from .freuder import FreuderSolver, freuder_solve
from .instance import CspInstance, CspSolution, constraint_graph, format_csp, write_csp

__all__ = [
    'CspInstance', 'CspSolution', 'FreuderSolver', 'augment_decomposition', 'check_extension',
    'constraint_graph', 'format_csp', 'freuder_solve', 'ilp_to_csp', 'write_csp',
]
