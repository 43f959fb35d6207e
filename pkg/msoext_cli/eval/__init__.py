"""
Brute-force MSO evaluation, shapes and the verification oracle.
"""
from .naive import ModelChecker, mc_naive
from .shapes import (
    Shape, shape_of, representative_of_shape, shape_admissible, shrink_graph, enumerate_shapes,
)
from .oracle import brute_force_solve, verify_assignment

__all__ = [
    'ModelChecker', 'mc_naive', 'Shape', 'shape_of', 'representative_of_shape',
    'shape_admissible', 'shrink_graph', 'enumerate_shapes', 'brute_force_solve',
    'verify_assignment',
]
