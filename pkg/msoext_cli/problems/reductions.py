"""
Hardness reductions as benchmark factories.

* Multicolored clique to LCC subset, the gadget whose vertex cover is
  ``C(k,2) + k(k-1)``.
* LCC subset in gadget shape to an MSO instance with global constraints,
  recognizing neighborhoods through attached marker cliques.
* Uniform LCC subset with independent types to multidemand set multicover.
"""
import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from ..core.graph import Graph, nd_decomposition, type_graph
from ..logic.constraints import (
    GlobalConstraint, IntervalSet, LocalConstraint, LocalConstraintMap, OracleConstraint,
)
from ..logic.formula import TRUE
from ..logic.instance import Instance, build_instance, fragment_of
from ..utils.config_manager import Limits
from ..utils.exceptions import NonUniform, ResourceLimit, ShapeViolation, ValidationError
from ..utils.validators import validate_non_negative, validate_positive

logger = logging.getLogger(__name__)

ZERO = IntervalSet.point(0)


# ----------------------------------------------------------------------------
# Instance types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LccSubsetInstance:
    """Find ``U`` with ``|U & N(v)|`` in ``demands[v]`` for every vertex.

    ``cover`` optionally records a vertex cover the instance was built around.
    """

    graph: Graph
    demands: Tuple[IntervalSet, ...]
    cover: Optional[FrozenSet[int]] = None

    def __post_init__(self):
        if len(self.demands) != self.graph.n:
            raise ValidationError(f"Expected {self.graph.n} demand sets, got {len(self.demands)}")
        for v, d in enumerate(self.demands):
            if d.intervals and (d.max is None or d.max > max(self.graph.n - 1, 0)):
                raise ValidationError(f"Demand of vertex {v + 1} leaves [0, {self.graph.n - 1}]")

    def admits(self, chosen: FrozenSet[int]) -> bool:
        g = self.graph
        return all(len(g.neighbor_set(v) & chosen) in self.demands[v] for v in range(g.n))


@dataclass(frozen=True)
class MulticoloredCliqueInstance:
    """A k-partite graph with independent color classes of equal size and equal cross-class edge counts."""

    graph: Graph
    classes: Tuple[Tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def n(self) -> int:
        return len(self.classes[0]) if self.classes else 0

    def edge_set(self, a: int, b: int) -> Tuple[Tuple[int, int], ...]:
        """Edges between classes ``a`` and ``b`` as ``(u in V_a, v in V_b)``, in a fixed order."""
        va, vb = set(self.classes[a]), set(self.classes[b])
        out = []
        for u, v in self.graph.edges():
            if u in va and v in vb:
                out.append((u, v))
            elif v in va and u in vb:
                out.append((v, u))
        return tuple(sorted(out))

    @property
    def m(self) -> int:
        return len(self.edge_set(0, 1)) if self.k >= 2 else 0

    def is_balanced(self) -> bool:
        if len({len(c) for c in self.classes}) > 1:
            return False
        return len({len(self.edge_set(a, b)) for a, b in itertools.combinations(range(self.k), 2)}) <= 1


@dataclass(frozen=True)
class SetMulticoverInstance:
    """Choose multiplicities summing to ``r`` so that each element's coverage lies in its demand.

    ``bounds`` optionally caps each multiplicity.
    """

    universe: int
    demands: Tuple[IntervalSet, ...]
    family: Tuple[FrozenSet[int], ...]
    r: int
    bounds: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if len(self.demands) != self.universe:
            raise ValidationError(f"Expected {self.universe} demands, got {len(self.demands)}")
        for j, members in enumerate(self.family):
            if any(not 0 <= i < self.universe for i in members):
                raise ValidationError(f"Set {j + 1} names an element outside 1..{self.universe}")
        if self.bounds is not None and len(self.bounds) != len(self.family):
            raise ValidationError("One bound per set is required")
        validate_non_negative("r", self.r)

    def coverage(self, multiplicities: Sequence[int]) -> List[int]:
        out = [0] * self.universe
        for members, m in zip(self.family, multiplicities):
            for i in members:
                out[i] += m
        return out

    def accepts(self, multiplicities: Sequence[int]) -> bool:
        if len(multiplicities) != len(self.family) or sum(multiplicities) != self.r:
            return False
        if self.bounds is not None and any(m > b for m, b in zip(multiplicities, self.bounds)):
            return False
        return all(c in d for c, d in zip(self.coverage(multiplicities), self.demands))


def format_set_multicover(smc: SetMulticoverInstance) -> str:
    lines = [f"u {smc.universe}", f"r {smc.r}"]
    lines += [f"d {i + 1} {d.format()}" for i, d in enumerate(smc.demands)]
    for j, members in enumerate(smc.family):
        lines.append(" ".join([f"f {j + 1}"] + [str(i + 1) for i in sorted(members)]))
    if smc.bounds is not None:
        lines += [f"b {j + 1} {b}" for j, b in enumerate(smc.bounds)]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# LCC subset as an instance
# ----------------------------------------------------------------------------

def encode_lcc_subset(lcc: LccSubsetInstance) -> Instance:
    """One free variable, formula ``true``, the demands as local constraints."""
    entries = {(0, v): LocalConstraint(d) for v, d in enumerate(lcc.demands)}
    lmap = LocalConstraintMap(1, lcc.graph.n, (), entries)
    inst = build_instance(lcc.graph, "free U : true", (), lmap)
    return Instance(inst.graph, inst.formula, (), lmap, {}, fragment_of(inst))


def lcc_from_instance(inst: Instance) -> LccSubsetInstance:
    """The LCC subset problem an instance states, if it states one.

    Raises:
        ValidationError: unless the instance has one variable, formula ``true``,
            no globals and unconditional locals
    """
    if inst.ell != 1 or inst.formula.body != TRUE or inst.global_constraints:
        raise ValidationError("An LCC subset instance has one variable, formula true and no globals")
    demands = []
    for v in range(inst.n):
        lc = inst.local_constraints.get(0, v)
        if lc.is_conditional:
            raise ValidationError(f"Conditional local constraint at vertex {v + 1}")
        demands.append(lc.allowed.clip(0, max(inst.n - 1, 0)))
    return LccSubsetInstance(inst.graph, tuple(demands))


# ----------------------------------------------------------------------------
# Multicolored clique
# ----------------------------------------------------------------------------

def multicolored_clique(graph: Graph, classes: Sequence[Sequence[int]]) -> MulticoloredCliqueInstance:
    """Validate a k-partite instance and pad it to equal class and edge-set sizes.

    Edge sets are padded (k >= 3 only) with private sinks: a new vertex of
    ``V_a`` joined to new vertices of ``V_b`` that touch nothing else, so no
    padded vertex lies in a k-clique. Classes are then padded with isolated
    vertices.

    Raises:
        ValidationError: when the classes do not partition V or one is not independent
    """
    classes = [list(c) for c in classes]
    seen = sorted(v for c in classes for v in c)
    if seen != list(range(graph.n)):
        raise ValidationError("Color classes must partition the vertex set")
    owner = {v: a for a, c in enumerate(classes) for v in c}
    for u, v in graph.edges():
        if owner[u] == owner[v]:
            raise ValidationError(f"Class {owner[u] + 1} is not independent: edge {u + 1}-{v + 1}")

    k = len(classes)
    edges = list(graph.edges())
    total = graph.n
    if k >= 3:
        base = MulticoloredCliqueInstance(graph, tuple(tuple(c) for c in classes))
        sizes = {(a, b): len(base.edge_set(a, b)) for a, b in itertools.combinations(range(k), 2)}
        m = max(sizes.values())
        for (a, b), have in sorted(sizes.items()):
            missing = m - have
            if missing <= 0:
                continue
            sink = total
            classes[a].append(sink)
            total += 1
            for _ in range(missing):
                classes[b].append(total)
                edges.append((sink, total))
                total += 1
            logger.debug(f"Padded E_{a + 1},{b + 1} with {missing} sink edges")
    n = max((len(c) for c in classes), default=0)
    for c in classes:
        while len(c) < n:
            c.append(total)
            total += 1
    return MulticoloredCliqueInstance(Graph(total, edges), tuple(tuple(c) for c in classes))


def has_multicolored_clique(mc: MulticoloredCliqueInstance) -> Optional[Tuple[int, ...]]:
    """A k-clique as one vertex per class, or None; classes are independent, so any k-clique is multicolored."""
    if mc.k == 0:
        return ()
    owner = {v: a for a, c in enumerate(mc.classes) for v in c}
    for clique in nx.find_cliques(mc.graph.to_networkx()):
        if len(clique) == mc.k:
            return tuple(sorted(clique, key=lambda v: owner[v]))
    return None


def random_multicolored_clique(k: int, n: int, m: int, planted: bool = False,
                               seed: int = 0) -> Tuple[MulticoloredCliqueInstance, Optional[Tuple[int, ...]]]:
    """Classes ``V_a = a*n .. a*n + n - 1`` with ``m`` random edges per class pair.

    With ``planted`` the edges of a random multicolored clique are included;
    it is returned as the second component.
    """
    validate_positive("k", k)
    validate_positive("n", n)
    validate_non_negative("m", m)
    if m > n * n:
        raise ValidationError(f"At most n^2 = {n * n} edges fit between two classes, got m={m}")
    if planted and k >= 2 and m < 1:
        raise ValidationError("A planted clique needs m >= 1")
    rng = random.Random(seed)
    classes = tuple(tuple(range(a * n, (a + 1) * n)) for a in range(k))
    clique = tuple(rng.choice(c) for c in classes) if planted else None
    edges: List[Tuple[int, int]] = []
    for a, b in itertools.combinations(range(k), 2):
        pairs = list(itertools.product(classes[a], classes[b]))
        required = [(clique[a], clique[b])] if clique else []
        rest = [p for p in pairs if p not in required]
        edges += required + rng.sample(rest, m - len(required))
    return MulticoloredCliqueInstance(Graph(k * n, edges), classes), clique


@dataclass(frozen=True)
class CliqueGadget:
    """The LCC subset gadget together with its vertex layout."""

    lcc: LccSubsetInstance
    big_n: int
    s_blocks: Tuple[Tuple[int, ...], ...]
    t_blocks: Dict[Tuple[int, int], Tuple[int, ...]] = field(default_factory=dict)
    mult: Dict[Tuple[int, int], int] = field(default_factory=dict)
    inc: Dict[Tuple[int, int], int] = field(default_factory=dict)
    mc: Optional[MulticoloredCliqueInstance] = None

    def witness(self, clique: Sequence[int]) -> FrozenSet[int]:
        """The solution a multicolored clique (one vertex per class) induces."""
        mc = self.mc
        chosen = set()
        for a, v in enumerate(clique):
            chosen.update(self.s_blocks[a][:mc.classes[a].index(v) + 1])
        for (a, b), block in self.t_blocks.items():
            edge = (clique[a], clique[b])
            chosen.update(block[:self.big_n * (mc.edge_set(a, b).index(edge) + 1)])
        return frozenset(chosen)


def build_clique_gadget(mc: MulticoloredCliqueInstance) -> CliqueGadget:
    """The reduction from multicolored clique to LCC subset.

    Per class an independent ``S_a`` of size n, per class pair an independent
    ``T_ab`` of size ``m*N`` and a vertex ``Mult_ab``, per ordered pair a
    vertex ``Inc_ab``; joins ``S_a - Inc_ab - T_ab - Mult_ab``. S and T
    vertices demand 0, ``Mult_ab`` demands a positive multiple of N up to
    ``m*N`` and ``Inc_ab`` demands ``mu_a(v) + N*eps(e)`` for the edges e of
    ``E_ab`` at their ``V_a`` endpoint v.
    """
    if not mc.is_balanced():
        mc = multicolored_clique(mc.graph, mc.classes)
    k, n, m = mc.k, mc.n, mc.m
    big_n = n * n if n > 1 else 2
    counter = itertools.count()
    s_blocks = tuple(tuple(next(counter) for _ in range(n)) for _ in range(k))
    pairs = list(itertools.combinations(range(k), 2))
    t_blocks = {p: tuple(next(counter) for _ in range(m * big_n)) for p in pairs}
    mult = {p: next(counter) for p in pairs}
    inc = {(a, b): next(counter) for a, b in itertools.permutations(range(k), 2)}
    total = next(counter)

    edges: List[Tuple[int, int]] = []
    demands: List[IntervalSet] = [ZERO] * total
    for (a, b), x in inc.items():
        edges += [(s, x) for s in s_blocks[a]]
        edges += [(x, t) for t in t_blocks[(min(a, b), max(a, b))]]
    for p, x in mult.items():
        edges += [(t, x) for t in t_blocks[p]]
        demands[x] = IntervalSet.from_values(t * big_n for t in range(1, m + 1))
    for (a, b), x in inc.items():
        low, high = min(a, b), max(a, b)
        values = set()
        for eps, (u, v) in enumerate(mc.edge_set(low, high), start=1):
            endpoint = u if a == low else v
            values.add(mc.classes[a].index(endpoint) + 1 + big_n * eps)
        demands[x] = IntervalSet.from_values(values)

    cover = frozenset(mult.values()) | frozenset(inc.values())
    lcc = LccSubsetInstance(Graph(total, edges), tuple(demands), cover)
    logger.info(f"Clique gadget: k={k}, n={n}, m={m}, N={big_n}, {total} vertices, cover {len(cover)}")
    return CliqueGadget(lcc, big_n, s_blocks, t_blocks, mult, inc, mc)


def gen_clique_to_lcc(mc: MulticoloredCliqueInstance) -> LccSubsetInstance:
    return build_clique_gadget(mc).lcc


# ----------------------------------------------------------------------------
# LCC subset to MSO with global constraints
# ----------------------------------------------------------------------------

def _same(a: str, b: str, w: str) -> str:
    return f"forall {w} ({w} = {a} | {w} = {b} | (edge({w}, {a}) <-> edge({w}, {b})))"


def _type(z: str) -> str:
    return (f"(exists x (x in {z})) & forall u, v ((u in {z} & v in {z}) -> {_same('u', 'v', 'w')}) "
            f"& forall u, v ((u in {z} & !(v in {z})) -> !({_same('u', 'v', 'w')}))")


def _clique(q: str) -> str:
    return f"forall x, y ((x in {q} & y in {q} & x != y) -> edge(x, y))"


def _exact_size(q: str, size: int) -> str:
    xs = [f"e{i}" for i in range(size)]
    distinct = [f"{a} != {b}" for a, b in itertools.combinations(xs, 2)]
    inside = [f"{x} in {q}" for x in xs]
    closed = "forall y (y in {0} -> ({1}))".format(q, " | ".join(f"y = {x}" for x in xs))
    return f"exists {', '.join(xs)} ({' & '.join(distinct + inside + [closed])})"


def _marker(q: str, size: int) -> str:
    return f"({_exact_size(q, size)}) & ({_clique(q)}) & ({_type(q)})"


def _neighborhood(z: str, size: int) -> str:
    """``z`` is the common neighborhood of the marker of the given size."""
    return f"exists Q (({_marker('Q', size)}) & forall u (u in {z} <-> forall w (w in Q -> edge(u, w))))"


def _selected_neighborhood(xv: str, x: str, size: int) -> str:
    return f"exists Z (({_neighborhood('Z', size)}) & forall x (x in {xv} <-> (x in Z & x in {x})))"


def gadget_cover(lcc: LccSubsetInstance) -> FrozenSet[int]:
    """The recorded cover, or the vertices with a demand other than ``{0}``."""
    if lcc.cover is not None:
        return lcc.cover
    return frozenset(v for v, d in enumerate(lcc.demands) if d != ZERO)


def lcc_to_msog(lcc: LccSubsetInstance) -> Instance:
    """MSO instance with global constraints equivalent to a gadget-shaped LCC subset instance.

    Each cover vertex ``c`` (the j-th, 1-based) gets a marker clique of
    ``2 + j`` new vertices joined to ``N(c)``. Variable ``X`` is the chosen
    set, restricted to the off-cover vertices (label ``B``); ``X_j`` is forced
    to ``N(c) & X`` by recognizing ``N(c)`` as the common neighborhood of the
    marker, and the global ``|X_j|`` in ``f(c)`` replaces the local demand.
    Marker vertices carry the label ``M``.

    Raises:
        ShapeViolation: unless the cover and its complement are independent
            and every off-cover demand is ``{0}``
    """
    g = lcc.graph
    cover = sorted(gadget_cover(lcc))
    cover_set = set(cover)
    for u, v in g.edges():
        if (u in cover_set) == (v in cover_set):
            raise ShapeViolation(f"Edge {u + 1}-{v + 1} does not cross the cover")
    for v in range(g.n):
        if v not in cover_set and lcc.demands[v] != ZERO:
            raise ShapeViolation(f"Off-cover vertex {v + 1} demands {lcc.demands[v]}, expected 0")

    edges = list(g.edges())
    total = g.n
    markers: List[Tuple[int, ...]] = []
    for j, c in enumerate(cover, start=1):
        members = tuple(range(total, total + 2 + j))
        total += 2 + j
        edges += list(itertools.combinations(members, 2))
        edges += [(w, x) for w in g.neighbors(c) for x in members]
        markers.append(members)
    labels = {"B": [v for v in range(g.n) if v not in cover_set],
              "M": [x for members in markers for x in members]}
    expanded = Graph(total, edges, labels)

    names = ["X"] + [f"X{j}" for j in range(1, len(cover) + 1)]
    conjuncts = ["forall x (x in X -> label(B, x))"]
    conjuncts += [_selected_neighborhood(names[j], "X", 2 + j) for j in range(1, len(cover) + 1)]
    body = " & ".join(f"({c})" for c in conjuncts)
    globals_: List[GlobalConstraint] = []
    for j, c in enumerate(cover, start=1):
        values = tuple(lcc.demands[c].values(g.n))
        globals_.append(OracleConstraint(f"f{j}", "member", (j,) + values))
    inst = build_instance(expanded, f"free {', '.join(names)} : {body}", globals_)
    logger.info(f"Marker expansion: {g.n} -> {total} vertices, {len(cover)} markers")
    return Instance(inst.graph, inst.formula, inst.global_constraints, inst.local_constraints, {},
                    fragment_of(inst))


# ----------------------------------------------------------------------------
# LCC subset to multidemand set multicover
# ----------------------------------------------------------------------------

def lcc_to_set_multicover(lcc: LccSubsetInstance) -> List[SetMulticoverInstance]:
    """One multicover instance per target ``r = 0..n`` over the universe of types.

    Set ``j`` is the type-graph neighborhood of type ``j`` and is bounded by
    the size of type ``j``; element ``i`` demands the common demand of type ``i``.

    Raises:
        NonUniform: when two vertices of one type demand differently
        ValidationError: when a type is a clique
    """
    g = lcc.graph
    nd = nd_decomposition(g)
    tg = type_graph(g, nd)
    demands: List[IntervalSet] = []
    for j, members in enumerate(nd.types):
        if nd.is_clique(j):
            raise ValidationError(f"Type {j + 1} is a clique; multicover needs independent types")
        wanted = {lcc.demands[v] for v in members}
        if len(wanted) > 1:
            raise NonUniform(f"Type {j + 1} mixes demands {sorted(str(d) for d in wanted)}")
        demands.append(lcc.demands[members[0]])
    family = tuple(frozenset(tg.neighbors(j)) for j in range(nd.nu))
    bounds = tuple(nd.size(j) for j in range(nd.nu))
    return [SetMulticoverInstance(nd.nu, tuple(demands), family, r, bounds) for r in range(g.n + 1)]


def solve_set_multicover(smc: SetMulticoverInstance, limits: Optional[Limits] = None) -> Optional[Tuple[int, ...]]:
    """Branching search over multiplicity vectors summing to ``r``.

    Sets are decided in order; an element is checked exactly once its last
    covering set is decided and bounded from above before that.

    Raises:
        ResourceLimit: beyond ``limits.multicover_cap`` search nodes
    """
    limits = limits or Limits()
    f = len(smc.family)
    last = [-1] * smc.universe
    for j, members in enumerate(smc.family):
        for i in members:
            last[i] = j
    if any(last[i] == -1 and 0 not in smc.demands[i] for i in range(smc.universe)):
        return None
    closing: List[List[int]] = [[] for _ in range(f)]
    for i, j in enumerate(last):
        if j >= 0:
            closing[j].append(i)
    ceilings = [d.max for d in smc.demands]

    coverage = [0] * smc.universe
    chosen: List[int] = []
    nodes = 0

    def search(j: int, remaining: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > limits.multicover_cap:
            raise ResourceLimit(f"Multicover search exceeded {limits.multicover_cap} nodes")
        if j == f:
            return remaining == 0
        top = remaining if smc.bounds is None else min(remaining, smc.bounds[j])
        low = remaining if j == f - 1 else 0
        for x in range(low, top + 1):
            for i in smc.family[j]:
                coverage[i] += x
            ok = all(coverage[i] in smc.demands[i] for i in closing[j]) and all(
                ceilings[i] is None or coverage[i] <= ceilings[i] for i in smc.family[j])
            if ok:
                chosen.append(x)
                if search(j + 1, remaining - x):
                    return True
                chosen.pop()
            for i in smc.family[j]:
                coverage[i] -= x
            if not ok and any(ceilings[i] is not None and coverage[i] + x > ceilings[i] for i in smc.family[j]):
                break
        return False

    found = search(0, smc.r)
    logger.debug(f"Multicover r={smc.r}: {nodes} nodes, {'found' if found else 'none'}")
    return tuple(chosen) if found else None


def solve_lcc_by_multicover(lcc: LccSubsetInstance, limits: Optional[Limits] = None) -> Optional[FrozenSet[int]]:
    """Solve a uniform LCC subset instance through the multicover family; returns ``U`` or None."""
    nd = nd_decomposition(lcc.graph)
    for smc in lcc_to_set_multicover(lcc):
        mult = solve_set_multicover(smc, limits)
        if mult is not None:
            return frozenset(v for j, x in enumerate(mult) for v in nd.types[j][:x])
    return None
