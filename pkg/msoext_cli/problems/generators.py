"""
Graph families and seeded random generators.
"""
import itertools
import random
from typing import Iterable, List, Optional, Sequence, Tuple

from ..core.graph import Graph


def path_graph(n: int) -> Graph:
    return Graph(n, [(v, v + 1) for v in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    edges = [(v, (v + 1) % n) for v in range(n)] if n >= 3 else [(v, v + 1) for v in range(n - 1)]
    return Graph(n, edges)


def complete_graph(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    """Center 0 joined to vertices ``1..leaves``."""
    return Graph(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(u, a + v) for u in range(a) for v in range(b)])


def edgeless_graph(n: int) -> Graph:
    return Graph(n)


def random_graph(n: int, p: float, seed: int = 0) -> Graph:
    rng = random.Random(seed)
    return Graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


def random_tree(n: int, seed: int = 0) -> Graph:
    rng = random.Random(seed)
    return Graph(n, [(v, rng.randrange(v)) for v in range(1, n)])


def random_partial_ktree(n: int, k: int, p: float = 0.7, seed: int = 0) -> Graph:
    """A random subgraph of a k-tree; treewidth at most ``k``."""
    rng = random.Random(seed)
    if n <= k + 1:
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < p]
        return Graph(n, edges)
    cliques: List[Tuple[int, ...]] = [tuple(range(k + 1))]
    edges = set(itertools.combinations(range(k + 1), 2))
    for v in range(k + 1, n):
        base = rng.choice(cliques)
        keep = rng.sample(base, k)
        edges.update((u, v) for u in keep)
        cliques.append(tuple(sorted(keep + [v])))
    return Graph(n, [e for e in sorted(edges) if rng.random() < p])


def random_cograph_like(types: Sequence[Tuple[int, bool]], seed: int = 0, p: float = 0.5) -> Graph:
    """A graph with prescribed twin classes: ``types`` lists (size, is_clique).

    Classes are joined completely or not at all, so neighborhood diversity
    is at most ``len(types)``.
    """
    rng = random.Random(seed)
    blocks: List[List[int]] = []
    start = 0
    for size, _ in types:
        blocks.append(list(range(start, start + size)))
        start += size
    edges = []
    for j, (size, is_clique) in enumerate(types):
        if is_clique:
            edges.extend(itertools.combinations(blocks[j], 2))
    for a, b in itertools.combinations(range(len(blocks)), 2):
        if rng.random() < p:
            edges.extend((u, v) for u in blocks[a] for v in blocks[b])
    return Graph(start, edges)
