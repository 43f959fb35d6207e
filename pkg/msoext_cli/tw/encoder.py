"""
Encoding of one pre-evaluation of a constrained MSO instance as a CSP laid
out along a nice tree decomposition.

Variables, in declaration order:

* ``("y", i, v)``: membership of vertex ``v`` in ``X_i``, domain {0, 1};
* ``("s", a, i)``: members of ``X_i`` among the vertices forgotten at or below ``a``;
* ``("lam", a, v, i)``: neighbours of bag vertex ``v`` in ``X_i`` forgotten at or below ``a``;
* ``("q", a)``: automaton state index at ``a``.

Join nodes also own ``("sc", a, i)``, ``("lamc", a, v, i)`` and ``("qc", a)``,
copies of the left child's values; introduce nodes own ``("qc", a)``. Every
extra variable joins the bag of its node and the bags of the node's children,
so each generated scope lies within one node's base bag, its own extras and
its parent's extras.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .automaton import TreeAutomaton
from ..core.treedecomp import NiceTreeDecomposition, NodeKind, TreeDecomposition
from ..csp.extension import augment_decomposition
from ..csp.instance import CspInstance
from ..eval.naive import ModelChecker
from ..eval.oracle import local_violation
from ..logic.constraints import PreEvaluation, compliance_check, eval_global
from ..logic.formula import Formula
from ..logic.instance import Instance
from ..utils.config_manager import Limits
from ..utils.exceptions import ResourceLimit

logger = logging.getLogger("msoext_cli.tw.encoder")

Key = Tuple[Hashable, ...]


@dataclass
class EncodedInstance:
    """The CSP of one pre-evaluation with its variable registry and augmented decomposition."""

    csp: CspInstance
    registry: Dict[Key, int]
    td: TreeDecomposition
    base_width: int = 0
    extras_per_node: int = 0
    states: int = 0

    def y(self, i: int, v: int) -> int:
        return self.registry[("y", i, v)]

    def decode(self, values: Dict[Hashable, int], ell: int, n: int) -> Tuple[frozenset, ...]:
        return tuple(frozenset(v for v in range(n) if values[self.y(i, v)]) for i in range(ell))


def _sum(t: Tuple[int, ...]) -> int:
    return sum(t)


def _identity(t: Tuple[int, ...]) -> int:
    return t[0]


@dataclass
class _Layout:
    extras: Dict[int, List[int]] = field(default_factory=dict)
    scopes: List[Sequence[int]] = field(default_factory=list)


class TwEncoder:
    """Builds the CSP for one pre-evaluation ``beta`` and residual formula."""

    def __init__(self, inst: Instance, ntd: NiceTreeDecomposition, limits: Optional[Limits] = None):
        self.inst = inst
        self.g = inst.graph
        self.ntd = ntd
        self.limits = limits or Limits()
        self.n, self.ell = inst.n, inst.ell
        self.csp = CspInstance()
        self.registry: Dict[Key, int] = {}
        self.layout = _Layout({a: [] for a in range(ntd.size)})
        self.states = 0

        for i in range(self.ell):
            for v in range(self.n):
                self._var(("y", i, v), (0, 1))

    # ------------------------------------------------------------------
    # Registry helpers
    # ------------------------------------------------------------------

    def _var(self, key: Key, domain, node: Optional[int] = None) -> int:
        vid = len(self.registry)
        self.registry[key] = vid
        self.csp.add_variable(vid, domain)
        if node is not None:
            self.layout.extras[node].append(vid)
        return vid

    def _y(self, i: int, v: int) -> int:
        return self.registry[("y", i, v)]

    def _function(self, inputs: Sequence[int], output: int, fn: Callable, name: str) -> None:
        self.csp.add_function(inputs, output, fn, name=name)
        self.layout.scopes.append(tuple(inputs) + (output,))

    def _relation(self, scope: Sequence[int], tuples, name: str) -> None:
        self.csp.add_relation(scope, tuples, name=name)
        self.layout.scopes.append(tuple(scope))

    def _predicate(self, scope: Sequence[int], pred: Callable, name: str) -> None:
        self.csp.add_predicate(scope, pred, name=name)
        self.layout.scopes.append(tuple(scope))

    # ------------------------------------------------------------------
    # Counters
    # ------------------------------------------------------------------

    def _join(self, a: int, key: Key, domain, tag: str) -> None:
        """``key`` at join ``a`` is the left value, carried in ``a``'s group, plus the right value."""
        left, right = self.ntd.children(a)
        reg = self.registry
        carry = self._var((key[0] + "c",) + key[1:], domain, node=a)
        self._function([reg[(key[0], left) + key[2:]]], carry, _identity, f"{tag}-carry@{a}")
        self._function([carry, reg[(key[0], right) + key[2:]]], reg[key], _sum, f"{tag}-join@{a}")

    def encode_global_counters(self) -> None:
        """``s_a^i`` counts the members of ``X_i`` among the vertices forgotten at or below ``a``."""
        ntd, reg = self.ntd, self.registry
        domain = range(self.n + 1)
        for a in ntd.postorder():
            for i in range(self.ell):
                self._var(("s", a, i), domain, node=a)
            kind, ch = ntd.kinds[a], ntd.children(a)
            for i in range(self.ell):
                s = reg[("s", a, i)]
                if kind == NodeKind.LEAF:
                    self._relation([s], [(0,)], f"s-leaf@{a}")
                elif kind == NodeKind.INTRODUCE:
                    self._function([reg[("s", ch[0], i)]], s, _identity, f"s-intro@{a}")
                elif kind == NodeKind.FORGET:
                    self._function([reg[("s", ch[0], i)], self._y(i, ntd.vertex[a])], s, _sum, f"s-forget@{a}")
                else:
                    self._join(a, ("s", a, i), domain, "s")

    def encode_global_relations(self, beta: PreEvaluation) -> None:
        """At the root, the counts must give every global constraint its value in ``beta``."""
        root = self.ntd.root
        held = sorted(self.ntd.bags[root])
        scope = [self.registry[("s", root, i)] for i in range(self.ell)]
        scope += [self._y(i, v) for i in range(self.ell) for v in held]
        ell, width = self.ell, len(held)

        def sizes(t: Tuple[int, ...]) -> Tuple[int, ...]:
            return tuple(t[i] + sum(t[ell + i * width:ell + (i + 1) * width]) for i in range(ell))

        for gc in self.inst.global_constraints:
            expected = beta.get(gc.cid)
            if expected is None:
                continue
            self._predicate(scope, lambda t, gc=gc, expected=expected: eval_global(gc, sizes(t)) == expected,
                            f"g:{gc.cid}={'T' if expected else 'F'}")

    def nontrivial_pairs(self) -> List[Tuple[int, int]]:
        """``(v, i)`` whose local constraint is not implied by the degree of ``v``."""
        lmap = self.inst.local_constraints
        return [(v, i) for i, v, lc in lmap.constraints() if not lc.is_trivial(len(self.g.neighbors(v)))]

    def encode_local_counters(self) -> None:
        """``lam_a^{v,i}`` for bag vertices with a nontrivial local constraint.

        The constraint is checked at ``top(v)``, where every neighbour of ``v``
        is either forgotten at or below that node or still in its bag.
        """
        ntd, g, reg = self.ntd, self.g, self.registry
        pairs = self.nontrivial_pairs()
        by_vertex: Dict[int, List[int]] = {}
        for v, i in pairs:
            by_vertex.setdefault(v, []).append(i)
        if not by_vertex:
            return
        for a in ntd.postorder():
            kind, ch = ntd.kinds[a], ntd.children(a)
            w = ntd.vertex[a]
            for v in sorted(ntd.bags[a]):
                for i in by_vertex.get(v, ()):
                    domain = range(len(g.neighbors(v)) + 1)
                    lam = self._var(("lam", a, v, i), domain, node=a)
                    tag = f"lam{v + 1}.{i + 1}"
                    if kind == NodeKind.INTRODUCE and v == w:
                        # nothing forgotten below a new vertex is adjacent to it
                        self._relation([lam], [(0,)], f"{tag}-intro@{a}")
                    elif kind == NodeKind.INTRODUCE:
                        self._function([reg[("lam", ch[0], v, i)]], lam, _identity, f"{tag}-copy@{a}")
                    elif kind == NodeKind.FORGET:
                        prev = reg[("lam", ch[0], v, i)]
                        if w in g.neighbor_set(v):
                            self._function([prev, self._y(i, w)], lam, _sum, f"{tag}-forget@{a}")
                        else:
                            self._function([prev], lam, _identity, f"{tag}-copy@{a}")
                    else:
                        self._join(a, ("lam", a, v, i), domain, tag)

        lmap = self.inst.local_constraints
        for v, i in pairs:
            top = ntd.top(v)
            lc = lmap.get(i, v)
            scope = [reg[("lam", top, v, i)]]
            scope += [self._y(i, u) for u in sorted(g.neighbor_set(v) & ntd.bags[top])]
            if lc.condition is None:
                self._predicate(scope, lambda t, lc=lc: lc.admits(sum(t)), f"alpha{i + 1}@{v + 1}")
            else:
                scope.append(self._y(lc.condition, v))
                self._predicate(scope, lambda t, lc=lc: lc.admits(sum(t[:-1]), bool(t[-1])),
                                f"alpha{i + 1}@{v + 1}")

    def encode_objective(self) -> None:
        """One unary soft constraint per nonzero weight."""
        for (i, v), w in sorted(self.inst.weights.items()):
            if w:
                self.csp.add_soft([self._y(i, v)], {(1,): w})

    # ------------------------------------------------------------------
    # Formula
    # ------------------------------------------------------------------

    def encode_automaton(self, aut: TreeAutomaton) -> None:
        """State variables with functional transitions; the root state must accept.

        Only reachable states get an index, so ``q_a`` has exactly the states
        the automaton can be in at ``a``.
        """
        if aut.is_trivial:
            return
        ntd, g, reg = self.ntd, self.g, self.registry
        idx = aut.indices
        index_of: Dict[int, Dict[Hashable, int]] = {}
        states: Dict[int, List[Hashable]] = {}
        work = 0

        def register(a: int, state: Hashable) -> int:
            table = index_of[a]
            if state not in table:
                table[state] = len(states[a])
                states[a].append(state)
            return table[state]

        transitions: Dict[int, Dict[Tuple[int, ...], int]] = {}
        inputs: Dict[int, List[int]] = {}
        for a in ntd.postorder():
            index_of[a], states[a] = {}, []
            kind, ch = ntd.kinds[a], ntd.children(a)
            table: Dict[Tuple[int, ...], int] = {}
            if kind == NodeKind.LEAF:
                s = aut.leaf()
                if s is not None:
                    register(a, s)
                inputs[a] = []
            elif kind == NodeKind.INTRODUCE:
                v = ntd.vertex[a]
                nbrs = sorted(g.neighbor_set(v) & ntd.bags[ch[0]])
                vertices = [v] + nbrs
                inputs[a] = [("qc", a)] + [self._y(i, u) for u in vertices for i in idx]
                for q, state in enumerate(states[ch[0]]):
                    for bits in itertools.product((0, 1), repeat=len(vertices) * len(idx)):
                        member = {u: 0 for u in vertices}
                        for k, b in enumerate(bits):
                            u, i = vertices[k // len(idx)], idx[k % len(idx)]
                            member[u] |= b << i
                        nxt = aut.introduce(state, v, nbrs, member)
                        if nxt is not None:
                            table[(q,) + bits] = register(a, nxt)
                        work += 1
            elif kind == NodeKind.FORGET:
                inputs[a] = [reg[("q", ch[0])]]
                for q, state in enumerate(states[ch[0]]):
                    nxt = aut.forget(state, ntd.vertex[a])
                    if nxt is not None:
                        table[(q,)] = register(a, nxt)
                    work += 1
            else:
                inputs[a] = [("qc", a), reg[("q", ch[1])]]
                for (ql, left), (qr, right) in itertools.product(enumerate(states[ch[0]]),
                                                                 enumerate(states[ch[1]])):
                    nxt = aut.join(left, right)
                    if nxt is not None:
                        table[(ql, qr)] = register(a, nxt)
                    work += 1
            if work > self.limits.max_table:
                raise ResourceLimit(f"Automaton transition tables exceeded max_table={self.limits.max_table}")
            transitions[a] = table
            self._var(("q", a), range(len(states[a])), node=a)

        for a in ntd.postorder():
            q = reg[("q", a)]
            kind = ntd.kinds[a]
            if kind == NodeKind.LEAF:
                self._relation([q], [(0,)] if states[a] else [], f"q-leaf@{a}")
                continue
            scope = inputs[a]
            if kind in (NodeKind.INTRODUCE, NodeKind.JOIN):
                child = ntd.children(a)[0]
                carry = self._var(("qc", a), range(len(states[child])), node=a)
                self._function([reg[("q", child)]], carry, _identity, f"q-carry@{a}")
                scope = [carry] + scope[1:]
            self._function(scope, q, transitions[a].get, f"q-{kind.value}@{a}")
        root = ntd.root
        accepting = [(k,) for k, state in enumerate(states[root]) if aut.accepts(state)]
        self._relation([reg[("q", root)]], accepting, "q-accept")
        self.states = sum(len(s) for s in states.values())
        logger.debug(f"Automaton has {self.states} reachable states over {ntd.size} nodes")

    def encode_model_check(self, residue: Formula) -> None:
        """Bruteforce backend: one predicate over every membership variable."""
        checker = ModelChecker(self.g, self.limits.mc_work_cap)
        names = self.inst.formula.free_vars
        ys = [self._y(i, v) for i in range(self.ell) for v in range(self.n)]
        n = self.n

        def holds(t: Tuple[int, ...]) -> bool:
            masks = [sum(t[i * n + v] << v for v in range(n)) for i in range(len(names))]
            return checker.holds(residue, dict(zip(names, masks)))

        self._predicate(ys, holds, "mso")

    # ------------------------------------------------------------------
    # Assembly
    # ------------------------------------------------------------------

    def base_decomposition(self, all_y: bool = False) -> TreeDecomposition:
        everything = frozenset(range(self.ell * self.n))
        bags = []
        for bag in self.ntd.bags:
            ys = frozenset(self._y(i, v) for v in bag for i in range(self.ell))
            bags.append(everything if all_y else ys)
        return TreeDecomposition(tuple(bags), self.ntd.parent)

    def finish(self, all_y: bool = False) -> EncodedInstance:
        """Augment the base decomposition with the per-node extras, checking scope locality.

        Raises:
            LocalityViolation: when some generated scope fits no augmented bag
        """
        base = self.base_decomposition(all_y)
        td = augment_decomposition(base, self.layout.extras, self.layout.scopes)
        k = max((len(x) for x in self.layout.extras.values()), default=0)
        logger.debug(f"Encoded CSP with {len(self.csp.variables)} variables; base width {base.width}, "
                     f"{k} extras per node, augmented width {td.width}")
        return EncodedInstance(self.csp, dict(self.registry), td, base.width, k, self.states)


def encode_instance(inst: Instance, ntd: NiceTreeDecomposition, beta: PreEvaluation, residue: Formula,
                    automaton: Optional[TreeAutomaton] = None, limits: Optional[Limits] = None) -> EncodedInstance:
    """The CSP whose feasible y-projection is the set of witnesses complying with ``beta``.

    With ``automaton=None`` the residue is checked by a single predicate over
    all membership variables.
    """
    enc = TwEncoder(inst, ntd, limits)
    if inst.global_constraints:
        enc.encode_global_counters()
        enc.encode_global_relations(beta)
    enc.encode_local_counters()
    if automaton is not None:
        enc.encode_automaton(automaton)
    else:
        enc.encode_model_check(residue)
    enc.encode_objective()
    return enc.finish(all_y=automaton is None)


def hard_instance(inst: Instance, beta: PreEvaluation, residue: Formula,
                  limits: Optional[Limits] = None) -> CspInstance:
    """Membership variables only, with one predicate admitting exactly the complying witnesses."""
    limits = limits or Limits()
    n, ell = inst.n, inst.ell
    csp = CspInstance()
    for k in range(ell * n):
        csp.add_variable(k, (0, 1))
    checker = ModelChecker(inst.graph, limits.mc_work_cap)
    names = inst.formula.free_vars

    def holds(t: Tuple[int, ...]) -> bool:
        masks = [sum(t[i * n + v] << v for v in range(n)) for i in range(ell)]
        if local_violation(inst, masks) is not None:
            return False
        sizes = [bin(m).count("1") for m in masks]
        if not compliance_check(sizes, beta, inst.global_constraints):
            return False
        return checker.holds(residue, dict(zip(names, masks)))

    csp.add_predicate(list(range(ell * n)), holds, name="witness")
    return csp
