"""
Graph structures and decompositions.
"""
from .graph import Graph, NeighborhoodDecomposition, TypeGraph, nd_decomposition, type_graph
from .treedecomp import (
    TreeDecomposition, NiceTreeDecomposition, make_nice, heuristic_tree_decomposition,
    validate_tree_decomposition, incidence_structure, top_node,
)

__all__ = [
    'Graph', 'NeighborhoodDecomposition', 'TypeGraph', 'nd_decomposition', 'type_graph',
    'TreeDecomposition', 'NiceTreeDecomposition', 'make_nice', 'heuristic_tree_decomposition',
    'validate_tree_decomposition', 'incidence_structure', 'top_node',
]
