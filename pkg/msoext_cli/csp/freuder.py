"""
Minimum-weight CSP solving by dynamic programming over a tree decomposition
of the constraint graph.

Each node keeps a table from assignments of its bag to the best weight of the
subtree below, together with the child rows that achieve it. Hard constraints
are checked at the first node (in post-order) whose bag holds their scope;
every soft constraint is charged once, at the topmost node holding its scope.
Tables only range over bag variables that some constraint in the subtree
mentions.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Set, Tuple

from .instance import CspInstance, CspSolution, HardConstraint, SoftConstraint, constraint_graph
from ..core.treedecomp import TreeDecomposition, check_tree_decomposition, heuristic_tree_decomposition
from ..utils.config_manager import Limits
from ..utils.exceptions import Infeasible, InvalidDecomposition, ResourceLimit

logger = logging.getLogger("msoext_cli.csp.freuder")

Key = Tuple[int, ...]
Row = Tuple[Fraction, Tuple[Key, ...]]


@dataclass
class _Plan:
    """Per-node evaluation order: child merges first, then the remaining variables."""

    bag: Tuple[Hashable, ...]
    steps: List[Tuple[str, object]]
    due: List[List[HardConstraint]]
    computed: Dict[Hashable, HardConstraint]
    soft: List[SoftConstraint]


def _topmost(td: TreeDecomposition, holders: List[int]) -> int:
    held = set(holders)
    tops = [a for a in holders if td.parent[a] not in held]
    return tops[0]


def _place(inst: CspInstance, td: TreeDecomposition, order: Sequence[int],
           bag_vars: List[Set[Hashable]]) -> Tuple[Dict[int, List[HardConstraint]], Dict[int, List[SoftConstraint]]]:
    hard: Dict[int, List[HardConstraint]] = {a: [] for a in order}
    soft: Dict[int, List[SoftConstraint]] = {a: [] for a in order}
    for hc in inst.hard:
        scope = set(hc.scope)
        host = next((a for a in order if scope <= bag_vars[a]), None)
        if host is None:
            raise InvalidDecomposition(f"No bag holds the scope of hard constraint '{hc.name}'")
        hard[host].append(hc)
    for sc in inst.soft:
        scope = set(sc.scope)
        holders = [a for a in order if scope <= bag_vars[a]]
        if not holders:
            raise InvalidDecomposition("No bag holds the scope of a soft constraint")
        soft[_topmost(td, holders)].append(sc)
    return hard, soft


def _plan(a: int, td: TreeDecomposition, bag: Tuple[Hashable, ...], bag_vars: List[Set[Hashable]],
          hard: List[HardConstraint], soft: List[SoftConstraint]) -> _Plan:
    steps: List[Tuple[str, object]] = []
    assigned: Set[Hashable] = set()
    for c in td.children(a):
        steps.append(("child", c))
        assigned |= bag_vars[c] & bag_vars[a]

    outputs = {hc.output: hc for hc in hard if hc.function is not None and hc.output not in assigned}
    computed: Dict[Hashable, HardConstraint] = {}
    remaining = [v for v in bag if v not in assigned]
    while remaining:
        ready = next((v for v in remaining if v in outputs
                      and all(x in assigned for x in outputs[v].scope[:-1])), None)
        if ready is not None:
            computed[ready] = outputs[ready]
            var = ready
        else:
            var = next((v for v in remaining if v not in outputs), remaining[0])
        steps.append(("var", var))
        assigned.add(var)
        remaining.remove(var)

    due: List[List[HardConstraint]] = [[] for _ in steps]
    seen: Set[Hashable] = set()
    pending = list(hard)
    for k, (kind, item) in enumerate(steps):
        seen |= (bag_vars[item] & bag_vars[a]) if kind == "child" else {item}
        due[k] = [hc for hc in pending if set(hc.scope) <= seen]
        pending = [hc for hc in pending if not set(hc.scope) <= seen]
    if not steps:
        due = [list(hard)]
        steps = [("none", None)]
    return _Plan(bag, steps, due, computed, soft)


class FreuderSolver:
    """Bottom-up table computation with a cap on the number of partial rows."""

    def __init__(self, inst: CspInstance, td: TreeDecomposition, limits: Optional[Limits] = None):
        self.inst = inst
        self.td = td
        self.limits = limits or Limits()
        g = constraint_graph(inst)
        problem = check_tree_decomposition(g, td)
        if problem:
            raise InvalidDecomposition(f"Decomposition does not fit the constraint graph: {problem}")
        self.bag_order = [tuple(inst.variables[k] for k in sorted(bag)) for bag in td.bags]
        self.bag_vars = [set(b) for b in self.bag_order]
        self.order = td.postorder()
        self.hard, self.soft = _place(inst, td, self.order, self.bag_vars)
        self._restrict_to_active()
        self.tables: Dict[int, Dict[Key, Row]] = {}
        self.rows_built = 0

    def _restrict_to_active(self) -> None:
        """Drop from each bag the variables no constraint in its subtree mentions.

        Such a variable is free below the node, so leaving it out of the table
        loses no row; it is enumerated at the first node that constrains it.
        """
        for a in self.order:
            seen: Set[Hashable] = set()
            for hc in self.hard[a]:
                seen.update(hc.scope)
            for sc in self.soft[a]:
                seen.update(sc.scope)
            for c in self.td.children(a):
                seen |= self.bag_vars[c]
            self.bag_order[a] = tuple(v for v in self.bag_order[a] if v in seen)
            self.bag_vars[a] = set(self.bag_order[a])

    def _projection(self, c: int, a: int) -> Tuple[Tuple[Hashable, ...], Dict[Key, Tuple[Fraction, Key]]]:
        sep = tuple(v for v in self.bag_order[c] if v in self.bag_vars[a])
        pos = [self.bag_order[c].index(v) for v in sep]
        proj: Dict[Key, Tuple[Fraction, Key]] = {}
        for key, (w, _) in self.tables[c].items():
            sk = tuple(key[p] for p in pos)
            if sk not in proj or w < proj[sk][0]:
                proj[sk] = (w, key)
        return sep, proj

    def _count(self, k: int) -> None:
        self.rows_built += k
        if self.rows_built > self.limits.max_table:
            raise ResourceLimit(f"CSP tables exceeded max_table={self.limits.max_table} rows")

    def _node(self, a: int) -> Dict[Key, Row]:
        plan = _plan(a, self.td, self.bag_order[a], self.bag_vars, self.hard[a], self.soft[a])
        partials: List[Tuple[Dict[Hashable, int], Fraction, Tuple[Key, ...]]] = [({}, Fraction(0), ())]
        for k, (kind, item) in enumerate(plan.steps):
            grown = []
            if kind == "child":
                sep, proj = self._projection(item, a)
                for assign, w, keys in partials:
                    for sk, (cw, ckey) in proj.items():
                        if any(assign.get(v, x) != x for v, x in zip(sep, sk)):
                            continue
                        merged = dict(assign)
                        merged.update(zip(sep, sk))
                        grown.append((merged, w + cw, keys + (ckey,)))
            elif kind == "var":
                var = item
                hc = plan.computed.get(var)
                for assign, w, keys in partials:
                    if hc is not None:
                        value = hc.function(tuple(assign[v] for v in hc.scope[:-1]))
                        values = (value,) if value is not None and value in self.inst.domains[var] else ()
                    else:
                        values = self.inst.domains[var]
                    for x in values:
                        merged = dict(assign)
                        merged[var] = x
                        grown.append((merged, w, keys))
            else:
                grown = partials
            checks = plan.due[k]
            if checks:
                grown = [p for p in grown if all(hc.allows(tuple(p[0][v] for v in hc.scope)) for hc in checks)]
            self._count(len(grown))
            partials = grown
            if not partials:
                break

        table: Dict[Key, Row] = {}
        for assign, w, keys in partials:
            for sc in plan.soft:
                w += sc.weight(tuple(assign[v] for v in sc.scope))
            key = tuple(assign[v] for v in plan.bag)
            if key not in table or w < table[key][0]:
                table[key] = (w, keys)
        return table

    def solve(self) -> CspSolution:
        """The minimum-weight feasible assignment; the first one found wins ties.

        Raises:
            Infeasible: when no assignment satisfies the hard constraints
            ResourceLimit: when the tables grow past ``max_table`` rows
        """
        for a in self.order:
            self.tables[a] = self._node(a)
            if not self.tables[a]:
                raise Infeasible(f"CSP is infeasible (empty table at node {a})")
        root = self.td.root
        best_key = min(self.tables[root], key=lambda k: self.tables[root][k][0])
        weight = self.tables[root][best_key][0]

        assignment: Dict[Hashable, int] = {}
        stack = [(root, best_key)]
        while stack:
            a, key = stack.pop()
            assignment.update(zip(self.bag_order[a], key))
            _, child_keys = self.tables[a][key]
            stack.extend(zip(self.td.children(a), child_keys))
        for var in self.inst.variables:
            if var not in assignment:
                domain = self.inst.domains[var]
                if not domain:
                    raise Infeasible(f"CSP is infeasible (variable {var} has an empty domain)")
                assignment[var] = next(iter(domain))
        logger.debug(f"Freuder DP over {self.td.size} nodes built {self.rows_built} rows, optimum {weight}")
        return CspSolution(assignment, weight)


def freuder_solve(inst: CspInstance, td: Optional[TreeDecomposition] = None,
                  limits: Optional[Limits] = None) -> CspSolution:
    """Exact minimum-weight solution of ``inst`` along ``td``.

    Without ``td`` a decomposition of the constraint graph is computed first.

    Raises:
        Infeasible: no feasible assignment
        InvalidDecomposition: ``td`` does not decompose the constraint graph
        ResourceLimit: table cap exceeded
    """
    limits = limits or Limits()
    if td is None:
        g = constraint_graph(inst)
        td = heuristic_tree_decomposition(g, exact=g.n <= limits.exact_tw_limit, exact_limit=limits.exact_tw_limit)
    return FreuderSolver(inst, td, limits).solve()
