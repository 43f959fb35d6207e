"""
Tree decompositions, their nice normal form, and the incidence-structure transform.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from networkx.algorithms.approximation import treewidth_min_fill_in

from .graph import LABEL_EDGE, LABEL_VERTEX, Graph
from ..utils.exceptions import InvalidDecomposition, ParseError, VertexNotInDecomposition

logger = logging.getLogger(__name__)

Bag = FrozenSet[int]


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted tree of bags given by parent links (``None`` marks the root)."""

    bags: Tuple[Bag, ...]
    parent: Tuple[Optional[int], ...]
    _children: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.bags) != len(self.parent):
            raise InvalidDecomposition("bag and parent lists differ in length")
        children: List[List[int]] = [[] for _ in self.bags]
        for a, p in enumerate(self.parent):
            if p is not None:
                if not 0 <= p < len(self.bags):
                    raise InvalidDecomposition(f"node {a} has unknown parent {p}")
                children[p].append(a)
        object.__setattr__(self, "_children", tuple(tuple(c) for c in children))

    @property
    def size(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def roots(self) -> List[int]:
        return [a for a, p in enumerate(self.parent) if p is None]

    @property
    def root(self) -> int:
        roots = self.roots
        if len(roots) != 1:
            raise InvalidDecomposition(f"expected one root, found {len(roots)}")
        return roots[0]

    def children(self, a: int) -> Tuple[int, ...]:
        return self._children[a]

    def postorder(self) -> List[int]:
        """Nodes with every child before its parent."""
        order: List[int] = []
        stack = [(self.root, False)]
        while stack:
            a, expanded = stack.pop()
            if expanded:
                order.append(a)
                continue
            stack.append((a, True))
            for c in reversed(self._children[a]):
                stack.append((c, False))
        return order

    def tree_edges(self) -> List[Tuple[int, int]]:
        return [(p, a) for a, p in enumerate(self.parent) if p is not None]


def check_tree_decomposition(g: Graph, td: TreeDecomposition) -> Optional[str]:
    """First violated condition, or None for a valid decomposition."""
    if not td.bags:
        return "decomposition has no nodes"
    roots = td.roots
    if len(roots) != 1:
        return f"tree has {len(roots)} roots"
    seen = set()
    queue = deque([roots[0]])
    while queue:
        a = queue.popleft()
        if a in seen:
            return f"node {a} reached twice"
        seen.add(a)
        queue.extend(td.children(a))
    if len(seen) != td.size:
        return f"{td.size - len(seen)} nodes unreachable from the root"

    for a, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < g.n:
                return f"bag {a} contains unknown vertex {v + 1}"

    holders: Dict[int, List[int]] = {v: [] for v in range(g.n)}
    for a, bag in enumerate(td.bags):
        for v in bag:
            holders[v].append(a)
    for v in range(g.n):
        if not holders[v]:
            return f"vertex {v + 1} is in no bag"
    for u, v in g.edges():
        if not any(u in td.bags[a] for a in holders[v]):
            return f"edge {u + 1}-{v + 1} is not covered"
    for v, nodes in holders.items():
        # subtree connectivity: exactly one holder whose parent lacks v
        tops = [a for a in nodes if td.parent[a] is None or v not in td.bags[td.parent[a]]]
        if len(tops) != 1:
            return f"nodes containing vertex {v + 1} are not connected"
    return None


def validate_tree_decomposition(g: Graph, td: TreeDecomposition) -> Tuple[bool, Optional[str]]:
    problem = check_tree_decomposition(g, td)
    return problem is None, problem


def from_tree_edges(bags: Sequence[Iterable[int]], edges: Iterable[Tuple[int, int]],
                    root: int = 0) -> TreeDecomposition:
    """Root an undirected bag tree at ``root``."""
    frozen = tuple(frozenset(b) for b in bags)
    if not frozen:
        raise InvalidDecomposition("decomposition has no nodes")
    adj: List[List[int]] = [[] for _ in frozen]
    edge_count = 0
    for a, b in edges:
        if not (0 <= a < len(frozen) and 0 <= b < len(frozen)):
            raise InvalidDecomposition(f"tree edge {a + 1}-{b + 1} names an unknown node")
        adj[a].append(b)
        adj[b].append(a)
        edge_count += 1
    if edge_count != len(frozen) - 1:
        raise InvalidDecomposition(f"{len(frozen)} nodes need {len(frozen) - 1} tree edges, got {edge_count}")
    parent: List[Optional[int]] = [None] * len(frozen)
    seen = {root}
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in sorted(adj[a]):
            if b not in seen:
                seen.add(b)
                parent[b] = a
                queue.append(b)
    if len(seen) != len(frozen):
        raise InvalidDecomposition("tree edges do not connect all nodes")
    return TreeDecomposition(frozen, tuple(parent))


# ----------------------------------------------------------------------------
# Decomposition file format
# ----------------------------------------------------------------------------

def parse_td(text: str) -> TreeDecomposition:
    """Parse ``td``/``s td`` header, ``b <id> <v...>`` bags and ``t <id1> <id2>`` edges (1-indexed)."""
    count: Optional[int] = None
    bags: Dict[int, List[int]] = {}
    edges: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == 'c':
            continue
        try:
            if parts[0] == 'td' or (parts[0] == 's' and parts[1:2] == ['td']):
                args = parts[1:] if parts[0] == 'td' else parts[2:]
                count = int(args[0])
            elif parts[0] == 'b':
                bags[int(parts[1]) - 1] = [int(x) - 1 for x in parts[2:]]
            elif parts[0] == 't':
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
            elif parts[0].isdigit() and len(parts) == 2:
                edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
            else:
                raise ParseError(f"Unknown decomposition line '{raw.strip()}'", line=lineno)
        except (IndexError, ValueError):
            raise ParseError(f"Malformed decomposition line '{raw.strip()}'", line=lineno)
    if count is None:
        raise ParseError("Missing 'td <nodes> <width+1> <n>' header")
    if sorted(bags) != list(range(count)):
        raise ParseError(f"Expected bags 1..{count}")
    return from_tree_edges([bags[a] for a in range(count)], edges)


def read_td(path: Union[str, Path]) -> TreeDecomposition:
    return parse_td(Path(path).read_text())


def format_td(td: TreeDecomposition, n: int) -> str:
    lines = [f"td {td.size} {td.width + 1} {n}"]
    for a, bag in enumerate(td.bags):
        lines.append(f"b {a + 1} {' '.join(str(v + 1) for v in sorted(bag))}".rstrip())
    lines.extend(f"t {p + 1} {a + 1}" for p, a in td.tree_edges())
    return "\n".join(lines) + "\n"


def write_td(td: TreeDecomposition, n: int, path: Union[str, Path]) -> None:
    Path(path).write_text(format_td(td, n))


# ----------------------------------------------------------------------------
# Heuristic and exact decompositions
# ----------------------------------------------------------------------------

def td_from_elimination_ordering(g: Graph, order: Sequence[int]) -> TreeDecomposition:
    """Bag of v is v plus its later neighbors in the filled graph."""
    if g.n == 0:
        return TreeDecomposition((frozenset(),), (None,))
    position = {v: i for i, v in enumerate(order)}
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    bags: List[Bag] = []
    later_neighbors: List[set] = []
    for v in order:
        later = {w for w in adj[v] if position[w] > position[v]}
        for a, b in itertools.combinations(later, 2):
            adj[a].add(b)
            adj[b].add(a)
        bags.append(frozenset(later | {v}))
        later_neighbors.append(later)
    last = len(order) - 1
    parent: List[Optional[int]] = []
    for i, later in enumerate(later_neighbors):
        if i == last:
            parent.append(None)
        elif later:
            parent.append(min(position[w] for w in later))
        else:
            parent.append(last)
    return TreeDecomposition(tuple(bags), tuple(parent))


def exact_treewidth_ordering(g: Graph) -> Tuple[int, List[int]]:
    """Optimal elimination ordering by dynamic programming over vertex subsets.

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v)
    are the vertices outside S and v reachable from v through S.
    """
    n = g.n
    full = (1 << n) - 1

    def q_size(s: int, v: int) -> int:
        seen = 1 << v
        stack = [v]
        count = 0
        while stack:
            x = stack.pop()
            frontier = g.adj_mask[x] & ~seen
            while frontier:
                low = frontier & -frontier
                w = low.bit_length() - 1
                frontier ^= low
                seen |= low
                if s >> w & 1:
                    stack.append(w)
                else:
                    count += 1
        return count

    best = {0: -1}
    choice: Dict[int, int] = {}
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            s = sum(1 << v for v in combo)
            value = None
            for v in combo:
                rest = s & ~(1 << v)
                cand = max(best[rest], q_size(rest, v))
                if value is None or cand < value:
                    value, choice[s] = cand, v
            best[s] = value
    order: List[int] = []
    s = full
    while s:
        v = choice[s]
        order.append(v)
        s &= ~(1 << v)
    order.reverse()
    return best[full], order


def heuristic_tree_decomposition(g: Graph, exact: bool = False,
                                 exact_limit: int = 12) -> TreeDecomposition:
    """Min-fill decomposition; with ``exact`` an optimal one when ``n <= exact_limit``."""
    if g.n == 0:
        return TreeDecomposition((frozenset(),), (None,))
    if exact:
        if g.n > exact_limit:
            logger.warning(f"Exact treewidth requested on n={g.n} > {exact_limit}; using min-fill")
        else:
            width, order = exact_treewidth_ordering(g)
            logger.debug(f"Exact treewidth {width}")
            return td_from_elimination_ordering(g, order)

    _, tree = treewidth_min_fill_in(g.to_networkx())
    nodes = sorted(tree.nodes, key=lambda bag: (sorted(bag), len(bag)))
    index = {bag: i for i, bag in enumerate(nodes)}
    td = from_tree_edges(nodes, [(index[a], index[b]) for a, b in tree.edges])
    problem = check_tree_decomposition(g, td)
    if problem:
        raise InvalidDecomposition(f"min-fill heuristic produced an invalid decomposition: {problem}")
    return td


# ----------------------------------------------------------------------------
# Nice tree decompositions
# ----------------------------------------------------------------------------

class NodeKind(str, Enum):
    LEAF = "leaf"
    INTRODUCE = "introduce"
    FORGET = "forget"
    JOIN = "join"


@dataclass(frozen=True)
class NiceTreeDecomposition(TreeDecomposition):
    """Nice form: node ids are post-order, the root bag is empty."""

    kinds: Tuple[NodeKind, ...] = ()
    vertex: Tuple[Optional[int], ...] = ()
    _top: Dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        top: Dict[int, int] = {}
        for a, bag in enumerate(self.bags):
            p = self.parent[a]
            for v in bag:
                if p is None or v not in self.bags[p]:
                    top[v] = a
        object.__setattr__(self, "_top", top)

    def top(self, v: int) -> int:
        if v not in self._top:
            raise VertexNotInDecomposition(f"vertex {v + 1} occurs in no bag")
        return self._top[v]

    def check_nice(self) -> Optional[str]:
        """First violation of the nice-form conditions, or None."""
        for a, kind in enumerate(self.kinds):
            ch = self.children(a)
            bag = self.bags[a]
            if kind == NodeKind.LEAF:
                if ch or bag:
                    return f"leaf {a} must be childless with an empty bag"
            elif kind == NodeKind.JOIN:
                if len(ch) != 2 or any(self.bags[c] != bag for c in ch):
                    return f"join {a} needs two children with identical bags"
            else:
                if len(ch) != 1:
                    return f"{kind.value} node {a} needs one child"
                child = self.bags[ch[0]]
                v = self.vertex[a]
                if kind == NodeKind.INTRODUCE and not (v not in child and bag == child | {v}):
                    return f"introduce node {a} does not add exactly vertex {v}"
                if kind == NodeKind.FORGET and not (v in child and bag == child - {v}):
                    return f"forget node {a} does not remove exactly vertex {v}"
        return None


def top_node(ntd: NiceTreeDecomposition, v: int) -> int:
    return ntd.top(v)


def contract_redundant_bags(td: TreeDecomposition) -> TreeDecomposition:
    """Merge every node whose bag is contained in a neighbor's bag into that neighbor."""
    bags = {a: set(b) for a, b in enumerate(td.bags)}
    adj: Dict[int, set] = {a: set() for a in bags}
    for p, a in td.tree_edges():
        adj[p].add(a)
        adj[a].add(p)
    changed = True
    while changed and len(bags) > 1:
        changed = False
        for a in sorted(bags):
            target = next((b for b in sorted(adj[a]) if bags[a] <= bags[b]), None)
            if target is None:
                continue
            for c in adj[a]:
                if c != target:
                    adj[c].discard(a)
                    adj[c].add(target)
                    adj[target].add(c)
            adj[target].discard(a)
            del adj[a]
            del bags[a]
            changed = True
            break
    ids = sorted(bags)
    index = {a: i for i, a in enumerate(ids)}
    edges = {(min(index[a], index[b]), max(index[a], index[b])) for a in ids for b in adj[a]}
    root = index[td.root] if td.root in index else 0
    return from_tree_edges([bags[a] for a in ids], sorted(edges), root=root)


class _NiceBuilder:
    def __init__(self):
        self.bags: List[Bag] = []
        self.parent: List[Optional[int]] = []
        self.kinds: List[NodeKind] = []
        self.vertex: List[Optional[int]] = []

    def add(self, bag: Bag, kind: NodeKind, children: Sequence[int], v: Optional[int] = None) -> int:
        a = len(self.bags)
        self.bags.append(bag)
        self.parent.append(None)
        self.kinds.append(kind)
        self.vertex.append(v)
        for c in children:
            self.parent[c] = a
        return a

    def chain(self, start: int, target: Bag) -> int:
        """Forget then introduce until the bag of ``start`` equals ``target``."""
        a = start
        bag = self.bags[a]
        for v in sorted(bag - target):
            bag = bag - {v}
            a = self.add(bag, NodeKind.FORGET, [a], v)
        for v in sorted(target - bag):
            bag = bag | {v}
            a = self.add(bag, NodeKind.INTRODUCE, [a], v)
        return a


def make_nice(g: Graph, td: TreeDecomposition) -> NiceTreeDecomposition:
    """Nice decomposition of the same width with empty leaf and root bags.

    Raises:
        InvalidDecomposition: when ``td`` is not a decomposition of ``g``, or
            when the result would have more than ``8n`` nodes
    """
    problem = check_tree_decomposition(g, td)
    if problem:
        raise InvalidDecomposition(problem)

    base = contract_redundant_bags(td)
    builder = _NiceBuilder()
    built: Dict[int, int] = {}
    empty: Bag = frozenset()
    for a in base.postorder():
        target = base.bags[a]
        tops = [builder.chain(built[c], target) for c in base.children(a)]
        if not tops:
            tops = [builder.chain(builder.add(empty, NodeKind.LEAF, []), target)]
        node = tops[0]
        for other in tops[1:]:
            node = builder.add(target, NodeKind.JOIN, [node, other])
        built[a] = node
    builder.chain(built[base.root], empty)

    ntd = NiceTreeDecomposition(tuple(builder.bags), tuple(builder.parent),
                                kinds=tuple(builder.kinds), vertex=tuple(builder.vertex))
    if ntd.size > 8 * max(g.n, 1):
        raise InvalidDecomposition(
            f"Nice decomposition needs {ntd.size} nodes, above 8n = {8 * max(g.n, 1)}; "
            f"the input has {base.size} bags with many large leaves")
    return ntd


# ----------------------------------------------------------------------------
# Incidence structure
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class IncidenceStructure:
    """A graph with each edge also subdivided by an L_E-labelled vertex."""

    graph: Graph
    td: TreeDecomposition
    edge_of: Dict[int, Tuple[int, int]]
    vertex_of_edge: Dict[Tuple[int, int], int]


def incidence_structure(g: Graph, td: TreeDecomposition) -> IncidenceStructure:
    """Keep every edge and add a subdivided copy through a new vertex ``n + idx``.

    Each new vertex gets its own leaf node whose bag is the covering bag plus
    the new vertex, so the width grows by at most one.
    """
    problem = check_tree_decomposition(g, td)
    if problem:
        raise InvalidDecomposition(problem)
    n = g.n
    edges = list(g.edges())
    new_edges = list(edges)
    edge_of: Dict[int, Tuple[int, int]] = {}
    vertex_of_edge: Dict[Tuple[int, int], int] = {}
    for idx, (u, v) in enumerate(edges):
        x = n + idx
        new_edges.extend([(u, x), (v, x)])
        edge_of[x] = (u, v)
        vertex_of_edge[(u, v)] = x
    total = n + len(edges)
    labels = {name: set(members) for name, members in g.vertex_labels.items()}
    labels[LABEL_VERTEX] = set(range(n))
    labels[LABEL_EDGE] = set(range(n, total))
    out = Graph(total, new_edges, labels, is_sigma2=True)

    bags = list(td.bags)
    parent = list(td.parent)
    for idx, (u, v) in enumerate(edges):
        host = next(a for a, bag in enumerate(td.bags) if u in bag and v in bag)
        bags.append(td.bags[host] | {n + idx})
        parent.append(host)
    out_td = TreeDecomposition(tuple(bags), tuple(parent))
    return IncidenceStructure(out, out_td, edge_of, vertex_of_edge)
