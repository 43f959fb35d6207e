"""
Direct problem-specific algorithms, used to cross-check the encoders.

All of them enumerate; they are meant for graphs of a handful of vertices.
"""
import itertools
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from ..core.graph import Graph
from ..eval.naive import mask_connected, to_mask
from ..logic.constraints import IntervalSet


def _equitable(sizes: Sequence[int]) -> bool:
    return max(sizes) - min(sizes) <= 1


def _colorings(n: int, k: int) -> Iterable[Tuple[int, ...]]:
    return itertools.product(range(k), repeat=n)


def _classes(coloring: Sequence[int], k: int) -> List[List[int]]:
    out: List[List[int]] = [[] for _ in range(k)]
    for v, c in enumerate(coloring):
        out[c].append(v)
    return out


def equitable_coloring(g: Graph, k: int) -> Optional[List[List[int]]]:
    """Some equitable proper k-coloring as a list of classes, or None."""
    for coloring in _colorings(g.n, k):
        if any(coloring[u] == coloring[v] for u, v in g.edges()):
            continue
        classes = _classes(coloring, k)
        if _equitable([len(c) for c in classes]):
            return classes
    return None


def equitable_connected_partition(g: Graph, k: int) -> Optional[List[List[int]]]:
    for coloring in _colorings(g.n, k):
        classes = _classes(coloring, k)
        if _equitable([len(c) for c in classes]) and all(mask_connected(g, to_mask(c)) for c in classes):
            return classes
    return None


def _assignable(sources: Mapping[object, Sequence[int]], capacities: Mapping[int, int]) -> bool:
    """Whether every source can be sent to one of its targets within the target capacities."""
    if not sources:
        return True
    flow = nx.DiGraph()
    for s, targets in sources.items():
        flow.add_edge("src", ("s", s), capacity=1)
        for t in targets:
            flow.add_edge(("s", s), ("t", t), capacity=1)
    for t, c in capacities.items():
        flow.add_edge(("t", t), "sink", capacity=c)
    if "sink" not in flow:
        return False
    value, _ = nx.maximum_flow(flow, "src", "sink")
    return value == len(sources)


def _subsets_by_size(n: int) -> Iterable[FrozenSet[int]]:
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            yield frozenset(combo)


def min_capacitated_dominating_set(g: Graph, capacities: Sequence[int]) -> int:
    """Size of a smallest D with a capacity-respecting domination of V minus D."""
    for d in _subsets_by_size(g.n):
        sources = {w: [v for v in g.neighbors(w) if v in d] for w in range(g.n) if w not in d}
        if _assignable(sources, {v: capacities[v] for v in d}):
            return len(d)
    return g.n


def min_vector_dominating_set(g: Graph, demands: Sequence[int]) -> int:
    for d in _subsets_by_size(g.n):
        if all(len(g.neighbor_set(v) & d) >= demands[v] for v in range(g.n) if v not in d):
            return len(d)
    return g.n


def generalized_dominating_set(g: Graph, sigma: IntervalSet, rho: IntervalSet) -> Optional[FrozenSet[int]]:
    """A smallest set D with ``|N(v) & D|`` in sigma on D and in rho off D."""
    for d in _subsets_by_size(g.n):
        if all(len(g.neighbor_set(v) & d) in (sigma if v in d else rho) for v in range(g.n)):
            return d
    return None


def min_capacitated_vertex_cover(g: Graph, capacities: Sequence[int]) -> Optional[int]:
    """Size of a smallest vertex cover that can absorb every edge within capacities."""
    for c in _subsets_by_size(g.n):
        if any(u not in c and v not in c for u, v in g.edges()):
            continue
        sources = {e: [x for x in e if x in c] for e in g.edges()}
        if _assignable(sources, {v: capacities[v] for v in c}):
            return len(c)
    return None


def general_factor(g: Graph, degrees: Sequence[IntervalSet]) -> Optional[FrozenSet[Tuple[int, int]]]:
    edges = g.edges()
    for chosen in itertools.product((False, True), repeat=len(edges)):
        deg = [0] * g.n
        for (u, v), keep in zip(edges, chosen):
            if keep:
                deg[u] += 1
                deg[v] += 1
        if all(deg[v] in degrees[v] for v in range(g.n)):
            return frozenset(e for e, keep in zip(edges, chosen) if keep)
    return None


def orientation_within(g: Graph, bound: int) -> Optional[Dict[Tuple[int, int], int]]:
    """An orientation with every outdegree at most ``bound``, as edge -> tail."""
    edges = g.edges()
    for tails in itertools.product((0, 1), repeat=len(edges)):
        out = [0] * g.n
        for e, t in zip(edges, tails):
            out[e[t]] += 1
        if max(out, default=0) <= bound:
            return {e: e[t] for e, t in zip(edges, tails)}
    return None


def graph_motif(g: Graph, colors: Mapping[str, FrozenSet[int]], motif: Mapping[str, int]) -> Optional[FrozenSet[int]]:
    """A connected vertex set with exactly ``motif[c]`` vertices of each color."""
    size = sum(motif.values())
    color_of = {v: c for c, members in colors.items() for v in members}
    for combo in itertools.combinations(range(g.n), size):
        counts: Dict[str, int] = {}
        for v in combo:
            counts[color_of[v]] = counts.get(color_of[v], 0) + 1
        if all(counts.get(c, 0) == motif.get(c, 0) for c in set(counts) | set(motif)) \
                and mask_connected(g, to_mask(combo)):
            return frozenset(combo)
    return None


def min_balanced_cut(g: Graph, k: int, weights: Optional[Mapping[Tuple[int, int], int]] = None) -> Optional[int]:
    """Minimum total weight of edges between parts over all equitable k-partitions."""
    best: Optional[int] = None
    for coloring in _colorings(g.n, k):
        if not _equitable([len(c) for c in _classes(coloring, k)]):
            continue
        cut = sum((weights or {}).get((u, v), 1) for u, v in g.edges() if coloring[u] != coloring[v])
        if best is None or cut < best:
            best = cut
    return best
