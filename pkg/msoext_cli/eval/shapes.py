"""
Signatures, shapes and graph shrinking.

A cell is a subset ``I`` of the free variables, encoded as a bitmask over
``0..l-1``; the exact cell of a vertex is the set of variables containing it.
Shapes store ``t + 1`` for the capped value.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .naive import DEFAULT_WORK_CAP, ModelChecker, mc_naive
from ..core.graph import Graph, NeighborhoodDecomposition, TypeKind, refine_decomposition
from ..logic.formula import Formula
from ..utils.exceptions import ResourceLimit

logger = logging.getLogger(__name__)

Assignment = Tuple[frozenset, ...]


def cell_of(assignment: Sequence[frozenset], v: int) -> int:
    return sum(1 << i for i, part in enumerate(assignment) if v in part)


def signature(assignment: Sequence[frozenset], nd: NeighborhoodDecomposition,
              ell: int) -> Tuple[Tuple[int, ...], ...]:
    """Exact cell counts per type."""
    out = []
    for members in nd.types:
        counts = [0] * (1 << ell)
        for v in members:
            counts[cell_of(assignment, v)] += 1
        out.append(tuple(counts))
    return tuple(out)


def nested_signature(exact: Sequence[Sequence[int]], ell: int) -> Tuple[Tuple[int, ...], ...]:
    """``|T_j & X_i for i in I|`` recovered by summing exact cells over supersets of ``I``."""
    out = []
    for counts in exact:
        out.append(tuple(sum(counts[J] for J in range(1 << ell) if J & I == I) for I in range(1 << ell)))
    return tuple(out)


@dataclass(frozen=True)
class Shape:
    """Per type, per exact cell: a count in ``0..t`` or ``t + 1`` for the capped value."""

    t: int
    ell: int
    values: Tuple[Tuple[int, ...], ...]

    @property
    def up(self) -> int:
        return self.t + 1

    def is_up(self, j: int, cell: int) -> bool:
        return self.values[j][cell] == self.up

    def support(self, j: int, i: int, member: bool) -> int:
        """Sum of the type-``j`` values over cells that do (or do not) contain variable ``i``."""
        return sum(value for cell, value in enumerate(self.values[j]) if bool(cell >> i & 1) == member)

    def __str__(self):
        def show(x):
            return "^" if x == self.up else str(x)
        return "; ".join("[" + " ".join(show(x) for x in row) + "]" for row in self.values)


def shape_of(assignment: Sequence[frozenset], nd: NeighborhoodDecomposition, t: int, ell: int) -> Shape:
    exact = signature(assignment, nd, ell)
    return Shape(t, ell, tuple(tuple(min(c, t + 1) for c in row) for row in exact))


def realizable_in_type(row: Sequence[int], size: int, t: int) -> bool:
    base = sum(row)
    if any(x == t + 1 for x in row):
        return base <= size
    return base == size


def representative_of_shape(sh: Shape, nd: NeighborhoodDecomposition) -> Optional[Assignment]:
    """A concrete assignment of shape ``sh``, or None when no assignment has that shape.

    Capped cells get ``t + 1`` vertices; the first capped cell of a type also
    absorbs whatever the type has left over.
    """
    ell = sh.ell
    parts: List[List[int]] = [[] for _ in range(ell)]
    for j, members in enumerate(nd.types):
        row = sh.values[j]
        if not realizable_in_type(row, len(members), sh.t):
            return None
        counts = list(row)
        leftover = len(members) - sum(row)
        if leftover:
            first_up = next(cell for cell, x in enumerate(row) if x == sh.up)
            counts[first_up] += leftover
        pos = 0
        for cell, count in enumerate(counts):
            chosen = members[pos:pos + count]
            pos += count
            for i in range(ell):
                if cell >> i & 1:
                    parts[i].extend(chosen)
    return tuple(frozenset(p) for p in parts)


def type_shapes(size: int, t: int, ell: int) -> List[Tuple[int, ...]]:
    """All realizable per-type shape rows, in lexicographic order."""
    cells = 1 << ell
    rows = []
    for row in itertools.product(range(t + 2), repeat=cells):
        if realizable_in_type(row, size, t):
            rows.append(row)
    return rows


def enumerate_shapes(nd: NeighborhoodDecomposition, t: int, ell: int,
                     max_shapes: Optional[int] = None) -> Iterator[Shape]:
    """All realizable shapes; at most ``(t+2)**(nu * 2**l)`` of them."""
    per_type = [type_shapes(len(members), t, ell) for members in nd.types]
    total = 1
    for rows in per_type:
        total *= len(rows)
    if max_shapes is not None and total > max_shapes:
        raise ResourceLimit(f"{total} realizable shapes exceed max_shapes={max_shapes}")
    logger.debug(f"Enumerating {total} shapes (nu={nd.nu}, l={ell}, t={t})")
    for combo in itertools.product(*per_type):
        yield Shape(t, ell, tuple(combo))


# ----------------------------------------------------------------------------
# Shrinking
# ----------------------------------------------------------------------------

def label_refined(g: Graph, nd: NeighborhoodDecomposition) -> NeighborhoodDecomposition:
    """Split types so that vertices of one type carry the same labels."""
    if not g.vertex_labels:
        return nd
    names = sorted(g.vertex_labels)
    return refine_decomposition(nd, lambda v: tuple(g.has_label(name, v) for name in names))


@dataclass(frozen=True)
class ShrunkGraph:
    graph: Graph
    nd: NeighborhoodDecomposition
    backmap: Tuple[int, ...]
    cap: int


def shrink_graph(g: Graph, nd: NeighborhoodDecomposition, cap: int, ell: int) -> ShrunkGraph:
    """Truncate each type to ``min(|T|, 2**l * cap)`` vertices.

    ``nd`` must separate differently labelled vertices (see ``label_refined``).
    """
    limit = (1 << ell) * cap
    kept: List[int] = []
    new_types: List[Tuple[int, ...]] = []
    kinds: List[TypeKind] = []
    for j, members in enumerate(nd.types):
        chosen = members[:limit]
        start = len(kept)
        kept.extend(chosen)
        new_types.append(tuple(range(start, start + len(chosen))))
        kinds.append(nd.kinds[j] if len(chosen) >= 2 else TypeKind.INDEPENDENT)
    sub, backmap = g.induced_subgraph(kept)
    shrunk_nd = NeighborhoodDecomposition(tuple(new_types), tuple(kinds))
    return ShrunkGraph(sub, shrunk_nd, tuple(backmap), cap)


def shrink_assignment(assignment: Sequence[frozenset], nd: NeighborhoodDecomposition,
                      shrunk: ShrunkGraph, ell: int) -> Assignment:
    """Map an assignment of ``g`` onto the shrunk graph, capping each cell at ``cap``."""
    cap = shrunk.cap
    exact = signature(assignment, nd, ell)
    parts: List[List[int]] = [[] for _ in range(ell)]
    for j, counts in enumerate(exact):
        new = [min(c, cap) for c in counts]
        deficit = len(shrunk.nd.types[j]) - sum(new)
        if deficit:
            big = next(cell for cell, c in enumerate(counts) if c > cap)
            new[big] += deficit
        pos = 0
        members = shrunk.nd.types[j]
        for cell, count in enumerate(new):
            chosen = members[pos:pos + count]
            pos += count
            for i in range(ell):
                if cell >> i & 1:
                    parts[i].extend(chosen)
    return tuple(frozenset(p) for p in parts)


def shape_admissible(sh: Shape, g: Graph, nd: NeighborhoodDecomposition, body: Formula,
                     free_vars: Sequence[str], shrunk: Optional[ShrunkGraph] = None,
                     work_cap: int = DEFAULT_WORK_CAP,
                     checker: Optional[ModelChecker] = None) -> bool:
    """Whether every assignment of shape ``sh`` satisfies the pure MSO ``body``.

    Evaluates one representative on the graph shrunk to ``t + 1`` per cell.
    """
    for j, members in enumerate(nd.types):
        if not realizable_in_type(sh.values[j], len(members), sh.t):
            return False
    if shrunk is None:
        shrunk = shrink_graph(g, nd, sh.t + 1, sh.ell)
    rep = representative_of_shape(sh, shrunk.nd)
    if rep is None:
        return False
    checker = checker or ModelChecker(shrunk.graph, work_cap)
    return mc_naive(shrunk.graph, body, rep, free_vars=free_vars, checker=checker)
