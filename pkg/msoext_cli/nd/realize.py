"""
Turning per-type cell counts into concrete vertex sets.

Each type is a small transportation problem: every vertex goes to exactly one
exact cell, cells take their prescribed number of vertices, and a vertex may
only use cells ``compatible`` with it. Weights become edge costs, so the flow
picks the cheapest realization.
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import networkx as nx

from ..core.graph import NeighborhoodDecomposition
from ..logic.instance import Assignment, Instance

logger = logging.getLogger("msoext_cli.nd.realize")

Compatible = Callable[[int, int, int], bool]


def cell_cost(inst: Instance, v: int, cell: int) -> int:
    return sum(inst.weight(i, v) for i in range(inst.ell) if cell >> i & 1)


def _in_order(members: Sequence[int], row: Sequence[int]) -> List[Tuple[int, int]]:
    out = []
    pos = 0
    for cell, count in enumerate(row):
        out.extend((v, cell) for v in members[pos:pos + count])
        pos += count
    return out


def _by_flow(inst: Instance, j: int, members: Sequence[int], row: Sequence[int],
             compatible: Optional[Compatible]) -> Optional[List[Tuple[int, int]]]:
    flow = nx.DiGraph()
    flow.add_node("source")
    flow.add_node("sink")
    for cell, count in enumerate(row):
        if count:
            flow.add_edge(("cell", cell), "sink", capacity=count, weight=0)
    for v in members:
        flow.add_edge("source", ("vertex", v), capacity=1, weight=0)
        for cell, count in enumerate(row):
            if count and (compatible is None or compatible(v, j, cell)):
                flow.add_edge(("vertex", v), ("cell", cell), capacity=1, weight=cell_cost(inst, v, cell))
    result = nx.max_flow_min_cost(flow, "source", "sink")
    if sum(result["source"].values()) < len(members):
        return None
    placed = []
    for v in members:
        for target, amount in result[("vertex", v)].items():
            if amount:
                placed.append((v, target[1]))
    return placed


def realize_cells(inst: Instance, nd: NeighborhoodDecomposition, counts: Sequence[Sequence[int]],
                  compatible: Optional[Compatible] = None) -> Optional[Assignment]:
    """An assignment with ``counts[j][I]`` vertices of type ``j`` in exact cell ``I``.

    Returns None when ``compatible`` rules out every realization.
    """
    parts: List[List[int]] = [[] for _ in range(inst.ell)]
    for j, members in enumerate(nd.types):
        row = counts[j]
        if compatible is None and not inst.has_weights:
            placed = _in_order(members, row)
        else:
            placed = _by_flow(inst, j, members, row, compatible)
            if placed is None:
                logger.debug(f"No realization of cell counts {tuple(row)} on type {j}")
                return None
        for v, cell in placed:
            for i in range(inst.ell):
                if cell >> i & 1:
                    parts[i].append(v)
    return tuple(frozenset(p) for p in parts)
