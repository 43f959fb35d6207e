"""
Encoders from named graph problems to solver instances.

Every formula is a conjunction of predicates the treewidth automaton
recognizes (partition, independence, connectivity, label containment), so
the encoded instances run on every solver path. Counting conditions go into
global or local cardinality constraints; minimization goes into unit
weights.
"""
import itertools
import logging
import re
from dataclasses import replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.graph import LABEL_EDGE, LABEL_VERTEX, Graph
from ..core.treedecomp import heuristic_tree_decomposition, incidence_structure
from ..logic.constraints import (
    GlobalConstraint, IntervalSet, LinearConstraint, LocalConstraint, LocalConstraintMap,
)
from ..logic.instance import Instance, build_instance, fragment_of
from ..utils.exceptions import ColorMissing, UnknownKind, ValidationError
from ..utils.validators import validate_non_negative, validate_positive

logger = logging.getLogger(__name__)

LABEL_HALF = "L_H"

DOMINATION_KINDS = (
    "VectorDominatingSet",
    "GeneralizedDomination",
    "CapacitatedVertexCover",
    "GeneralFactor",
    "MinMaxOutdegree",
)

CountSet = Union[IntervalSet, Iterable[int]]

_COLOR_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


# ----------------------------------------------------------------------------
# Formula and constraint helpers
# ----------------------------------------------------------------------------

def _independent(x: str) -> str:
    return f"forall x, y ((x in {x} & y in {x}) -> !edge(x, y))"


def _disjoint(x: str, y: str) -> str:
    return f"forall x !(x in {x} & x in {y})"


def _covers(names: Sequence[str]) -> str:
    return "forall x (" + " | ".join(f"x in {name}" for name in names) + ")"


def _subset(x: str, y: str) -> str:
    return f"forall x (x in {x} -> x in {y})"


def _label_subset(x: str, label: str) -> str:
    return f"forall x (x in {x} -> label({label}, x))"


def _partition(names: Sequence[str]) -> List[str]:
    parts = [_covers(names)]
    parts.extend(_disjoint(a, b) for a, b in itertools.combinations(names, 2))
    return parts


def _formula(names: Sequence[str], conjuncts: Sequence[str]) -> str:
    body = " & ".join(f"({c})" for c in conjuncts) if conjuncts else "true"
    return f"free {', '.join(names)} : {body}"


def _linear(cid: str, ell: int, terms: Mapping[int, int], sense: str, bound: int) -> LinearConstraint:
    coeffs = [Fraction(0)] * ell
    for i, a in terms.items():
        coeffs[i] += a
    return LinearConstraint(cid, tuple(coeffs), sense, Fraction(bound))


def _equitable(k: int, ell: int) -> List[GlobalConstraint]:
    """``-1 <= |X_i| - |X_j| <= 1`` for every pair of the first ``k`` variables."""
    out: List[GlobalConstraint] = []
    for i, j in itertools.combinations(range(k), 2):
        out.append(_linear(f"eq{i + 1}_{j + 1}u", ell, {i: 1, j: -1}, "<=", 1))
        out.append(_linear(f"eq{i + 1}_{j + 1}l", ell, {i: 1, j: -1}, ">=", -1))
    return out


def _count_set(values: CountSet) -> IntervalSet:
    return values if isinstance(values, IntervalSet) else IntervalSet.from_values(values)


def _tagged(inst: Instance) -> Instance:
    return replace(inst, fragment=fragment_of(inst))


def _parts(k: int, prefix: str = "X") -> List[str]:
    return [f"{prefix}{i + 1}" for i in range(k)]


# ----------------------------------------------------------------------------
# Partition problems
# ----------------------------------------------------------------------------

def encode_equitable_coloring(g: Graph, k: int) -> Instance:
    """Proper k-coloring whose class sizes differ by at most one.

    Raises:
        ValidationError: if k < 1
    """
    validate_positive("k", k)
    names = _parts(k)
    conjuncts = _partition(names) + [_independent(x) for x in names]
    logger.debug(f"Equitable {k}-coloring on {g}")
    return _tagged(build_instance(g, _formula(names, conjuncts), _equitable(k, k)))


def encode_equitable_connected_partition(g: Graph, k: int) -> Instance:
    """Equitable k-partition into connected parts."""
    validate_positive("k", k)
    names = _parts(k)
    conjuncts = _partition(names) + [f"connected({x})" for x in names]
    return _tagged(build_instance(g, _formula(names, conjuncts), _equitable(k, k)))


def encode_balanced_partitioning(g: Graph, k: int,
                                 edge_weights: Optional[Mapping[Tuple[int, int], int]] = None,
                                 ) -> Instance:
    """Equitable k-partition of V with the cut edges collected in Y, weighted by ``edge_weights``.

    The instance lives on the incidence structure: ``X_1..X_k`` partition the
    original vertices (disjoint, inside ``L_V``, sizes summing to n) and the
    edge vertex of ``uv`` lies in ``Y`` exactly when ``u`` and ``v`` are in
    different parts. The edge vertex of the idx-th edge is ``n + idx``; minimum
    weight is the minimum cut.
    """
    validate_positive("k", k)
    inc = incidence_structure(g, heuristic_tree_decomposition(g))
    h = inc.graph
    ell = k + 1
    names = _parts(k) + ["Y"]
    conjuncts = [_disjoint(a, b) for a, b in itertools.combinations(names[:k], 2)]
    conjuncts += [_label_subset(x, LABEL_VERTEX) for x in names[:k]]
    conjuncts.append(_label_subset("Y", LABEL_EDGE))

    globals_ = [_linear("cover", ell, {i: 1 for i in range(k)}, "=", g.n)] + _equitable(k, ell)

    entries: Dict[Tuple[int, int], LocalConstraint] = {}
    crossing = IntervalSet.range(0, 1)
    inside = IntervalSet.from_values((0, 2))
    for x in inc.edge_of:
        for i in range(k):
            entries[(i, x)] = LocalConstraint(crossing, k, inside)
    lmap = LocalConstraintMap(ell, h.n, (), entries)

    weights = {}
    for x, (u, v) in inc.edge_of.items():
        w = 1 if edge_weights is None else edge_weights.get((u, v), edge_weights.get((v, u), 1))
        weights[(k, x)] = w
    inst = build_instance(h, _formula(names, conjuncts), globals_, lmap, weights)
    return _tagged(inst)


# ----------------------------------------------------------------------------
# Domination on the incidence structure
# ----------------------------------------------------------------------------

def encode_capacitated_dominating_set(g: Graph, capacities: Sequence[int]) -> Instance:
    """Capacitated dominating set with variables ``D`` (vertices) and ``F`` (edges).

    * ``D`` inside ``L_V`` and ``F`` inside ``L_E``;
    * a vertex outside ``D`` sees an edge of ``F``, a vertex in ``D`` sees at
      most ``c(v)`` of them;
    * every edge of ``F`` has an endpoint in ``D``.

    Unit weights on ``D`` select a minimum dominating set.
    """
    if len(capacities) != g.n:
        raise ValidationError(f"Expected {g.n} capacities, got {len(capacities)}")
    for c in capacities:
        validate_non_negative("capacity", c)
    inc = incidence_structure(g, heuristic_tree_decomposition(g))
    h = inc.graph
    conjuncts = [_label_subset("D", LABEL_VERTEX), _label_subset("F", LABEL_EDGE)]

    entries: Dict[Tuple[int, int], LocalConstraint] = {}
    for v in range(g.n):
        entries[(1, v)] = LocalConstraint(IntervalSet.range(0, capacities[v]), 0, IntervalSet.range(1, None))
    for x in inc.edge_of:
        entries[(0, x)] = LocalConstraint(IntervalSet.range(1, None), 1, IntervalSet.full())
    lmap = LocalConstraintMap(2, h.n, (), entries)
    weights = {(0, v): 1 for v in range(g.n)}
    inst = build_instance(h, _formula(["D", "F"], conjuncts), (), lmap, weights)
    return _tagged(inst)


def half_edge_structure(g: Graph) -> Tuple[Graph, Dict[int, Tuple[int, int]]]:
    """Replace each edge ``uv`` by a path ``u - h_u - h_v - v``.

    ``h_u`` is vertex ``n + 2*idx`` and ``h_v`` vertex ``n + 2*idx + 1``; the
    returned map sends each half to ``(owner, partner)``. Half vertices carry
    the label ``L_H``, original vertices ``L_V``.
    """
    n = g.n
    edges: List[Tuple[int, int]] = []
    halves: Dict[int, Tuple[int, int]] = {}
    for idx, (u, v) in enumerate(g.edges()):
        hu, hv = n + 2 * idx, n + 2 * idx + 1
        edges += [(u, hu), (hu, hv), (hv, v)]
        halves[hu] = (u, hv)
        halves[hv] = (v, hu)
    labels = {LABEL_VERTEX: range(n), LABEL_HALF: halves.keys()}
    return Graph(n + 2 * g.m, edges, labels), halves


def _one_half_each(a: int, halves: Mapping[int, Tuple[int, int]]) -> Dict[Tuple[int, int], LocalConstraint]:
    """Exactly one half of every edge lies in ``X_a``."""
    return {(a, h): LocalConstraint(IntervalSet.point(0), a, IntervalSet.point(1)) for h in halves}


def _as_list(values, n: int, what: str) -> List:
    if isinstance(values, Mapping):
        return [values.get(v, 0) for v in range(n)]
    values = list(values)
    if len(values) != n:
        raise ValidationError(f"Expected {n} {what}, got {len(values)}")
    return values


def encode_domination_family(kind: str, g: Graph, params: Mapping[str, object]) -> Instance:
    """Local-constraint encodings of the domination-type problems.

    ``kind`` and its ``params``:

    * ``VectorDominatingSet``: ``demands``; minimizes ``|D|``.
    * ``GeneralizedDomination``: ``sigma``, ``rho`` and optional ``minimize``.
    * ``CapacitatedVertexCover``: ``capacities``; minimizes ``|C|`` on the half-edge structure.
    * ``GeneralFactor``: ``degrees``, one admissible set per vertex, on the incidence structure.
    * ``MinMaxOutdegree``: ``bound`` on every outdegree, on the half-edge structure.

    Raises:
        UnknownKind: for any other kind
    """
    key = kind.replace("-", "").replace("_", "").lower()
    canonical = {k.lower(): k for k in DOMINATION_KINDS}.get(key)
    if canonical is None:
        raise UnknownKind(f"Unknown problem kind '{kind}' (known: {', '.join(DOMINATION_KINDS)})")
    logger.debug(f"Encoding {canonical} on {g}")

    if canonical == "VectorDominatingSet":
        demands = _as_list(params.get("demands", ()), g.n, "demands")
        entries = {(0, v): LocalConstraint(IntervalSet.full(), 0, IntervalSet.range(d, None))
                   for v, d in enumerate(demands)}
        lmap = LocalConstraintMap(1, g.n, (), entries)
        weights = {(0, v): 1 for v in range(g.n)}
        return _tagged(build_instance(g, "free D : true", (), lmap, weights))

    if canonical == "GeneralizedDomination":
        sigma = _count_set(params["sigma"])
        rho = _count_set(params["rho"])
        lmap = LocalConstraintMap(1, g.n, (LocalConstraint(sigma, 0, rho),))
        weights = {(0, v): 1 for v in range(g.n)} if params.get("minimize") else {}
        return _tagged(build_instance(g, "free D : true", (), lmap, weights))

    if canonical == "GeneralFactor":
        degrees = [_count_set(s) for s in _as_list(params.get("degrees", ()), g.n, "degree sets")]
        inc = incidence_structure(g, heuristic_tree_decomposition(g))
        entries = {(0, v): LocalConstraint(degrees[v]) for v in range(g.n)}
        lmap = LocalConstraintMap(1, inc.graph.n, (), entries)
        return _tagged(build_instance(inc.graph, _formula(["F"], [_label_subset("F", LABEL_EDGE)]), (), lmap))

    h, halves = half_edge_structure(g)
    if canonical == "MinMaxOutdegree":
        bound = params["bound"]
        validate_non_negative("bound", bound)
        entries = _one_half_each(0, halves)
        entries.update({(0, v): LocalConstraint(IntervalSet.range(0, bound)) for v in range(g.n)})
        lmap = LocalConstraintMap(1, h.n, (), entries)
        return _tagged(build_instance(h, _formula(["A"], [_label_subset("A", LABEL_HALF)]), (), lmap))

    capacities = _as_list(params.get("capacities", ()), g.n, "capacities")
    entries = _one_half_each(1, halves)
    entries.update({(1, v): LocalConstraint(IntervalSet.range(0, c), 0, IntervalSet.point(0))
                    for v, c in enumerate(capacities)})
    lmap = LocalConstraintMap(2, h.n, (), entries)
    conjuncts = [_label_subset("C", LABEL_VERTEX), _label_subset("A", LABEL_HALF)]
    weights = {(0, v): 1 for v in range(g.n)}
    return _tagged(build_instance(h, _formula(["C", "A"], conjuncts), (), lmap, weights))


# ----------------------------------------------------------------------------
# Graph motif
# ----------------------------------------------------------------------------

def color_classes(g: Graph, colors: Optional[Sequence[str]] = None) -> Dict[str, frozenset]:
    """The color labels of ``g``; every vertex must carry exactly one.

    Raises:
        ColorMissing: when a vertex has no color
        ValidationError: when a vertex has two colors or a color name is unusable in formulas
    """
    names = list(colors) if colors is not None else sorted(
        name for name in g.vertex_labels if name not in (LABEL_VERTEX, LABEL_EDGE, LABEL_HALF))
    owner: Dict[int, str] = {}
    for name in names:
        if not _COLOR_NAME.fullmatch(name):
            raise ValidationError(f"Color '{name}' is not a valid label name")
        for v in g.label(name):
            if v in owner:
                raise ValidationError(f"Vertex {v + 1} carries colors {owner[v]} and {name}")
            owner[v] = name
    missing = [v + 1 for v in range(g.n) if v not in owner]
    if missing:
        raise ColorMissing(f"Vertices without a color: {missing}")
    return {name: g.label(name) for name in names}


def encode_graph_motif(g: Graph, motif: Union[Mapping[str, int], Sequence[str]],
                       colors: Optional[Sequence[str]] = None) -> Instance:
    """Connected ``S`` whose color multiset equals ``motif``.

    Variable ``S_c`` holds ``S`` restricted to color ``c``: ``S_c`` lies in
    ``S`` and in ``L_c``, and ``|S| = sum |S_c|`` forces ``S_c = S & L_c``
    because the colors partition V. Linear globals pin ``|S_c|`` to the
    multiplicity of ``c``.

    Raises:
        ColorMissing: for uncolored vertices or motif colors the graph does not carry
    """
    classes = color_classes(g, colors)
    if not isinstance(motif, Mapping):
        counts: Dict[str, int] = {}
        for c in motif:
            counts[c] = counts.get(c, 0) + 1
        motif = counts
    unknown = sorted(set(motif) - set(classes))
    if unknown:
        raise ColorMissing(f"Motif colors not present as labels: {unknown}")
    if sum(motif.values()) == 0:
        logger.warning("Empty motif: the empty set counts as connected")

    palette = sorted(classes)
    ell = 1 + len(palette)
    names = ["S"] + [f"S{j + 1}" for j in range(len(palette))]
    conjuncts = ["connected(S)"]
    for j, color in enumerate(palette):
        conjuncts.append(_subset(names[j + 1], "S"))
        conjuncts.append(_label_subset(names[j + 1], color))

    globals_: List[GlobalConstraint] = [
        _linear("split", ell, {0: 1, **{j + 1: -1 for j in range(len(palette))}}, "=", 0)]
    for j, color in enumerate(palette):
        globals_.append(_linear(f"mult_{color}", ell, {j + 1: 1}, "=", motif.get(color, 0)))
    return _tagged(build_instance(g, _formula(names, conjuncts), globals_))
