"""
Refinement of a neighborhood decomposition until local constraints are uniform per type.

Vertices of one independent type all see the same number of X_i-vertices,
so their constraints can be intersected. In a clique type the count is
``s - 1`` for selected and ``s`` for unselected vertices, which bounds how far
the constraints of two vertices can disagree.
"""
import logging
from typing import Dict, List, Sequence, Tuple

from ..core.graph import Graph, NeighborhoodDecomposition, TypeKind
from ..logic.constraints import IntervalSet, LocalConstraint, LocalConstraintMap
from ..utils.exceptions import Infeasible, UnsupportedFragment

logger = logging.getLogger("msoext_cli.nd.refine")

# per type, per variable
UniformAlpha = Tuple[Tuple[IntervalSet, ...], ...]


def _alpha(lmap: LocalConstraintMap, i: int, v: int) -> IntervalSet:
    lc = lmap.get(i, v)
    if lc.is_conditional:
        raise UnsupportedFragment(f"Conditional local constraint of X{i + 1} at vertex {v + 1} cannot be refined")
    return lc.allowed


def refine_type(g: Graph, nd: NeighborhoodDecomposition, alpha: Dict[int, IntervalSet],
                j: int) -> Tuple[List[Tuple[int, ...]], Dict[int, IntervalSet]]:
    """Split type ``j`` so that ``alpha`` becomes uniform on each part.

    Args:
        g: the graph
        nd: decomposition containing type ``j``
        alpha: admissible counts of one variable for every vertex of the type
        j: type index

    Returns:
        The subtypes (vertex tuples) and the narrowed constraint per vertex.

    Raises:
        Infeasible: when no assignment can meet the constraints of the type
    """
    members = nd.types[j]
    if any(alpha[v].is_empty for v in members):
        raise Infeasible(f"Type {j} has a vertex with no admissible count")

    if not nd.is_clique(j):
        common = IntervalSet.full()
        for v in members:
            common = common.intersect(alpha[v])
        if common.is_empty:
            raise Infeasible(f"Independent type {j} has disjoint constraints")
        return [tuple(members)], {v: common for v in members}

    lower = max(alpha[v].min for v in members)
    uppers = [alpha[v].max for v in members if alpha[v].max is not None]
    upper = min(uppers) if uppers else None
    if upper is not None and upper <= lower - 2:
        raise Infeasible(f"Clique type {j}: constraints {lower}.. and ..{upper} are more than one apart")

    window = IntervalSet.range(max(lower - 1, 0), None if upper is None else upper + 1)
    narrowed = {v: alpha[v].intersect(window) for v in members}
    if any(narrowed[v].is_empty for v in members):
        raise Infeasible(f"Clique type {j} leaves a vertex without admissible counts")

    groups: Dict[IntervalSet, List[int]] = {}
    for v in members:
        groups.setdefault(narrowed[v], []).append(v)
    parts = sorted(tuple(vs) for vs in groups.values())
    return parts, narrowed


def _split(nd: NeighborhoodDecomposition, j: int, parts: Sequence[Tuple[int, ...]],
           types: List[Tuple[int, ...]], kinds: List[TypeKind]) -> None:
    for part in parts:
        types.append(part)
        kinds.append(nd.kinds[j] if len(part) >= 2 else TypeKind.INDEPENDENT)


def refine_uniform(g: Graph, nd: NeighborhoodDecomposition,
                   lmap: LocalConstraintMap) -> Tuple[NeighborhoodDecomposition, UniformAlpha]:
    """Refine ``nd`` until every variable's constraint is uniform on every type.

    The result has at most ``nu * 4**l`` types when all constraints are
    intervals, and admits exactly the same assignments as ``lmap``.

    Raises:
        Infeasible: when some type cannot be satisfied at all
        UnsupportedFragment: on conditional constraints
    """
    current = nd
    narrowed: List[Dict[int, IntervalSet]] = []
    for i in range(lmap.ell):
        alpha = {v: _alpha(lmap, i, v) for v in range(g.n)}
        types: List[Tuple[int, ...]] = []
        kinds: List[TypeKind] = []
        new_alpha: Dict[int, IntervalSet] = {}
        for j in range(current.nu):
            parts, local = refine_type(g, current, alpha, j)
            new_alpha.update(local)
            _split(current, j, parts, types, kinds)
        order = sorted(range(len(types)), key=lambda k: types[k][0])
        current = NeighborhoodDecomposition(tuple(types[k] for k in order), tuple(kinds[k] for k in order))
        narrowed.append(new_alpha)

    table = tuple(
        tuple(narrowed[i][members[0]] for i in range(lmap.ell))
        for members in current.types
    )
    if current.nu != nd.nu:
        logger.debug(f"Refined {nd.nu} types into {current.nu} for uniform local constraints")
    return current, table


def uniform_alpha_map(nd: NeighborhoodDecomposition, table: UniformAlpha, ell: int,
                      n: int) -> LocalConstraintMap:
    """The per-vertex map described by a uniform table."""
    entries = {}
    for j, members in enumerate(nd.types):
        for i in range(ell):
            if table[j][i] != IntervalSet.full():
                for v in members:
                    entries[(i, v)] = LocalConstraint(table[j][i])
    return LocalConstraintMap(ell, n, (), entries)
