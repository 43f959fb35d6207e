"""
Graphs, neighborhood-diversity decompositions and type graphs.

Vertices are ``0..n-1`` internally; graph files are 1-indexed.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from ..utils.exceptions import InvalidDecomposition, ParseError, ValidationError
from ..utils.validators import validate_edges

logger = logging.getLogger(__name__)

LABEL_VERTEX = "L_V"
LABEL_EDGE = "L_E"


class Graph:
    """An undirected simple graph with optional vertex labels.

    The object is immutable after construction and safe to share.
    """

    __slots__ = ("n", "adjacency", "adj_mask", "_adj_sets", "vertex_labels", "is_sigma2", "_edges")

    def __init__(self, n: int, edges: Iterable[Tuple[int, int]] = (),
                 labels: Optional[Mapping[str, Iterable[int]]] = None,
                 is_sigma2: bool = False):
        if n < 0:
            raise ValidationError("Vertex count must be non-negative")
        edge_list = [(int(u), int(v)) for u, v in edges]
        validate_edges(n, edge_list)

        adj = [set() for _ in range(n)]
        for u, v in edge_list:
            adj[u].add(v)
            adj[v].add(u)

        self.n = n
        self.adjacency: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in adj)
        self._adj_sets: Tuple[FrozenSet[int], ...] = tuple(frozenset(a) for a in adj)
        self.adj_mask: Tuple[int, ...] = tuple(sum(1 << w for w in a) for a in adj)
        self._edges: Tuple[Tuple[int, int], ...] = tuple(
            sorted((u, v) for u in range(n) for v in self.adjacency[u] if u < v))

        clean: Dict[str, FrozenSet[int]] = {}
        for name, members in (labels or {}).items():
            members = frozenset(int(v) for v in members)
            for v in members:
                if not 0 <= v < n:
                    raise ValidationError(f"Label '{name}' names vertex {v + 1} outside 1..{n}")
            clean[name] = members
        self.vertex_labels: Mapping[str, FrozenSet[int]] = clean
        self.is_sigma2 = is_sigma2

        if is_sigma2:
            lv = clean.get(LABEL_VERTEX, frozenset())
            le = clean.get(LABEL_EDGE, frozenset())
            if lv & le or len(lv) + len(le) != n:
                raise ValidationError("L_V and L_E must partition the vertex set of an incidence structure")

    @property
    def m(self) -> int:
        return len(self._edges)

    def edges(self) -> Tuple[Tuple[int, int], ...]:
        return self._edges

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def neighbor_set(self, v: int) -> FrozenSet[int]:
        return self._adj_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def label(self, name: str) -> FrozenSet[int]:
        return self.vertex_labels.get(name, frozenset())

    def has_label(self, name: str, v: int) -> bool:
        return v in self.vertex_labels.get(name, ())

    def induced_subgraph(self, vertices: Sequence[int]) -> Tuple["Graph", List[int]]:
        """Induced subgraph on ``vertices``, relabelled ``0..k-1`` in the given order.

        Returns the subgraph and the back-map from new to old ids.
        """
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[v]) for u, v in self._edges if u in index and v in index]
        labels = {name: [index[v] for v in members if v in index]
                  for name, members in self.vertex_labels.items()}
        return Graph(len(vertices), edges, labels), list(vertices)

    def to_networkx(self) -> nx.Graph:
        nxg = nx.Graph()
        nxg.add_nodes_from(range(self.n))
        nxg.add_edges_from(self._edges)
        return nxg

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.adjacency == other.adjacency
                and dict(self.vertex_labels) == dict(other.vertex_labels))

    def __hash__(self):
        return hash((self.n, self.adjacency))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, labels={sorted(self.vertex_labels)})"


# ----------------------------------------------------------------------------
# Graph file format
# ----------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse the line-oriented graph format.

    ``p <n> <m>`` header, ``e <u> <v>`` edges, ``l <name> <v...>`` labels,
    ``c`` comments. The PACE ``p tw <n> <m>`` header with bare ``u v`` edge
    lines is accepted too.
    """
    n: Optional[int] = None
    declared_m: Optional[int] = None
    edges: List[Tuple[int, int]] = []
    labels: Dict[str, List[int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == 'c':
            continue
        try:
            if parts[0] == 'p':
                args = parts[2:] if len(parts) > 1 and parts[1] == 'tw' else parts[1:]
                n, declared_m = int(args[0]), int(args[1])
            elif parts[0] == 'e':
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
            elif parts[0] == 'l':
                labels.setdefault(parts[1], []).extend(int(x) - 1 for x in parts[2:])
            elif parts[0].isdigit() and len(parts) == 2:
                edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
            else:
                raise ParseError(f"Unknown graph line '{raw.strip()}'", line=lineno)
        except (IndexError, ValueError):
            raise ParseError(f"Malformed graph line '{raw.strip()}'", line=lineno)

    if n is None:
        raise ParseError("Missing 'p <n> <m>' header")
    # duplicate edge lines are tolerated; the adjacency is a set
    unique = {(min(u, v), max(u, v)) for u, v in edges}
    if declared_m is not None and declared_m != len(unique):
        logger.warning(f"Header declares {declared_m} edges, found {len(unique)}")
    try:
        is_sigma2 = LABEL_VERTEX in labels and LABEL_EDGE in labels
        return Graph(n, sorted(unique), labels, is_sigma2=is_sigma2)
    except ValidationError as e:
        raise ParseError(str(e))


def read_graph(path: Union[str, Path]) -> Graph:
    return parse_graph(Path(path).read_text())


def format_graph(g: Graph) -> str:
    lines = [f"p {g.n} {g.m}"]
    lines.extend(f"e {u + 1} {v + 1}" for u, v in g.edges())
    for name in sorted(g.vertex_labels):
        members = " ".join(str(v + 1) for v in sorted(g.vertex_labels[name]))
        lines.append(f"l {name} {members}".rstrip())
    return "\n".join(lines) + "\n"


def write_graph(g: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_graph(g))


# ----------------------------------------------------------------------------
# Neighborhood diversity
# ----------------------------------------------------------------------------

class TypeKind(str, Enum):
    CLIQUE = "clique"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class NeighborhoodDecomposition:
    """Partition of V into types with a clique/independent flag per type."""

    types: Tuple[Tuple[int, ...], ...]
    kinds: Tuple[TypeKind, ...]
    type_of: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.type_of:
            n = sum(len(t) for t in self.types)
            owner = [-1] * n
            for j, members in enumerate(self.types):
                for v in members:
                    if not 0 <= v < n or owner[v] != -1:
                        raise InvalidDecomposition(f"Types are not a partition of 0..{n - 1}")
                    owner[v] = j
            object.__setattr__(self, "type_of", tuple(owner))

    @property
    def nu(self) -> int:
        return len(self.types)

    def is_clique(self, j: int) -> bool:
        return self.kinds[j] == TypeKind.CLIQUE

    def size(self, j: int) -> int:
        return len(self.types[j])


def same_type(g: Graph, u: int, v: int) -> bool:
    """N(u) minus v equals N(v) minus u."""
    return g.neighbor_set(u) - {v} == g.neighbor_set(v) - {u}


def nd_decomposition(g: Graph) -> NeighborhoodDecomposition:
    """The unique minimal neighborhood decomposition.

    False twins share an open neighborhood, true twins a closed one; no
    vertex can have both kinds of twin, so grouping by open neighborhoods
    and then by closed neighborhoods yields the coarsest partition.
    """
    by_open: Dict[FrozenSet[int], List[int]] = {}
    for v in range(g.n):
        by_open.setdefault(g.neighbor_set(v), []).append(v)

    groups: List[Tuple[Tuple[int, ...], TypeKind]] = []
    rest: List[int] = []
    for members in by_open.values():
        if len(members) >= 2:
            groups.append((tuple(members), TypeKind.INDEPENDENT))
        else:
            rest.extend(members)

    by_closed: Dict[FrozenSet[int], List[int]] = {}
    for v in rest:
        by_closed.setdefault(g.neighbor_set(v) | {v}, []).append(v)
    for members in by_closed.values():
        kind = TypeKind.CLIQUE if len(members) >= 2 else TypeKind.INDEPENDENT
        groups.append((tuple(sorted(members)), kind))

    groups.sort(key=lambda item: item[0][0])
    return NeighborhoodDecomposition(tuple(t for t, _ in groups), tuple(k for _, k in groups))


def refine_decomposition(nd: NeighborhoodDecomposition, key) -> NeighborhoodDecomposition:
    """Split every type by ``key(v)``; subtypes keep their parent's kind."""
    types: List[Tuple[int, ...]] = []
    kinds: List[TypeKind] = []
    for j, members in enumerate(nd.types):
        buckets: Dict[object, List[int]] = {}
        for v in members:
            buckets.setdefault(key(v), []).append(v)
        for part in sorted(buckets.values()):
            types.append(tuple(part))
            kinds.append(nd.kinds[j] if len(part) >= 2 else TypeKind.INDEPENDENT)
    order = sorted(range(len(types)), key=lambda i: types[i][0])
    return NeighborhoodDecomposition(tuple(types[i] for i in order), tuple(kinds[i] for i in order))


@dataclass(frozen=True)
class TypeGraph:
    """Quotient graph of a neighborhood decomposition; loops on clique types."""

    nu: int
    edges: FrozenSet[Tuple[int, int]]
    loops: FrozenSet[int]

    def adjacent(self, i: int, j: int) -> bool:
        if i == j:
            return i in self.loops
        return (min(i, j), max(i, j)) in self.edges

    def neighbors(self, i: int) -> List[int]:
        """Type neighbors of ``i``, including ``i`` itself when it carries a loop."""
        return [j for j in range(self.nu) if self.adjacent(i, j)]

    def to_networkx(self) -> nx.Graph:
        nxg = nx.Graph()
        nxg.add_nodes_from(range(self.nu))
        nxg.add_edges_from(self.edges)
        nxg.add_edges_from((i, i) for i in self.loops)
        return nxg


def check_decomposition(g: Graph, nd: NeighborhoodDecomposition) -> Optional[str]:
    """First violation of the decomposition invariants, or None."""
    if sum(len(t) for t in nd.types) != g.n:
        return f"types cover {sum(len(t) for t in nd.types)} of {g.n} vertices"
    for j, members in enumerate(nd.types):
        for u, v in itertools.combinations(members, 2):
            if not same_type(g, u, v):
                return f"vertices {u + 1} and {v + 1} of type {j} differ in neighborhood"
        if len(members) >= 2:
            adjacent = g.has_edge(members[0], members[1])
            expected = TypeKind.CLIQUE if adjacent else TypeKind.INDEPENDENT
            if nd.kinds[j] != expected:
                return f"type {j} is flagged {nd.kinds[j].value} but induces a {expected.value}"
        elif nd.kinds[j] != TypeKind.INDEPENDENT:
            return f"singleton type {j} must be flagged independent"
    return None


def type_graph(g: Graph, nd: NeighborhoodDecomposition) -> TypeGraph:
    problem = check_decomposition(g, nd)
    if problem:
        raise InvalidDecomposition(problem)

    edges = set()
    for i, j in itertools.combinations(range(nd.nu), 2):
        joined = [g.has_edge(u, v) for u in nd.types[i] for v in nd.types[j]]
        if all(joined):
            edges.add((i, j))
        elif any(joined):
            raise InvalidDecomposition(f"types {i} and {j} are neither joined nor anti-joined")
    loops = frozenset(j for j in range(nd.nu) if nd.is_clique(j))
    return TypeGraph(nd.nu, frozenset(edges), loops)


def relabel_by_types(g: Graph, nd: NeighborhoodDecomposition
                     ) -> Tuple[Graph, NeighborhoodDecomposition, List[int]]:
    """Renumber vertices so every type is a contiguous block, in type order.

    Returns the relabelled graph, its decomposition and the map from new to old ids.
    """
    order = [v for members in nd.types for v in members]
    relabelled, back = g.induced_subgraph(order)
    types, start = [], 0
    for members in nd.types:
        types.append(tuple(range(start, start + len(members))))
        start += len(members)
    return relabelled, NeighborhoodDecomposition(tuple(types), nd.kinds), back


def vertex_cover_number(g: Graph, limit: int = 20) -> int:
    """Exact vertex cover number by branching on an uncovered edge."""
    def branch(edges: FrozenSet[Tuple[int, int]], budget: int) -> bool:
        if not edges:
            return True
        if budget == 0:
            return False
        u, v = min(edges)
        return (branch(frozenset(e for e in edges if u not in e), budget - 1)
                or branch(frozenset(e for e in edges if v not in e), budget - 1))

    all_edges = frozenset(g.edges())
    for k in range(0, min(limit, g.n) + 1):
        if branch(all_edges, k):
            return k
    raise ValidationError(f"Vertex cover exceeds search limit {limit}")
