"""
Problem encoders, benchmark generators and hardness reductions.
"""
from .encoders import (
    DOMINATION_KINDS, color_classes, encode_balanced_partitioning, encode_capacitated_dominating_set,
    encode_domination_family, encode_equitable_coloring, encode_equitable_connected_partition,
    encode_graph_motif, half_edge_structure,
)
from .reductions import (
    CliqueGadget, LccSubsetInstance, MulticoloredCliqueInstance, SetMulticoverInstance,
    build_clique_gadget, encode_lcc_subset, format_set_multicover, gen_clique_to_lcc,
    has_multicolored_clique, lcc_from_instance, lcc_to_msog, lcc_to_set_multicover,
    multicolored_clique, random_multicolored_clique, solve_lcc_by_multicover, solve_set_multicover,
)

__all__ = [
    'CliqueGadget', 'DOMINATION_KINDS', 'LccSubsetInstance', 'MulticoloredCliqueInstance',
    'SetMulticoverInstance', 'build_clique_gadget', 'color_classes', 'encode_balanced_partitioning',
    'encode_capacitated_dominating_set', 'encode_domination_family', 'encode_equitable_coloring',
    'encode_equitable_connected_partition', 'encode_graph_motif', 'encode_lcc_subset',
    'format_set_multicover', 'gen_clique_to_lcc', 'half_edge_structure', 'has_multicolored_clique',
    'lcc_from_instance', 'lcc_to_msog', 'lcc_to_set_multicover', 'multicolored_clique',
    'random_multicolored_clique', 'solve_lcc_by_multicover', 'solve_set_multicover',
]
