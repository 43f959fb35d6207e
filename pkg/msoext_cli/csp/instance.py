"""
Constraint satisfaction instances with hard constraints and weighted soft constraints.

Variables are hashable keys; the constraint graph numbers them in declaration
order. A hard constraint is given either by an explicit relation, by a
predicate, or functionally: ``output = fn(inputs)``, which the solver can
evaluate instead of branching.

Dump format::

    [vars]
    <id> <key>
    [domains]
    <id> <v1> <v2> ...
    [hard]
    <name> scope <id> ... : relation (a,b) (c,d) ...   |   : predicate
    [soft]
    scope <id> ... : (a,b)=w ...
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import (
    Callable, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union,
)

from ..core.graph import Graph
from ..utils.exceptions import ResourceLimit, ValidationError

logger = logging.getLogger(__name__)

Values = Tuple[int, ...]


@dataclass(frozen=True)
class HardConstraint:
    """``scope`` with exactly one of ``relation``, ``predicate`` or ``function``.

    A functional constraint holds when the last scope variable equals
    ``function`` applied to the others; ``None`` from the function rejects.
    """

    scope: Tuple[Hashable, ...]
    relation: Optional[FrozenSet[Values]] = None
    predicate: Optional[Callable[[Values], bool]] = field(default=None, compare=False)
    function: Optional[Callable[[Values], Optional[int]]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        given = sum(x is not None for x in (self.relation, self.predicate, self.function))
        if given != 1:
            raise ValidationError(f"Hard constraint '{self.name}' needs one of relation, predicate, function")
        if len(set(self.scope)) != len(self.scope):
            raise ValidationError(f"Hard constraint '{self.name}' repeats a variable in its scope")
        if self.function is not None and not self.scope:
            raise ValidationError(f"Functional constraint '{self.name}' has no output variable")

    @property
    def output(self) -> Optional[Hashable]:
        return self.scope[-1] if self.function is not None else None

    def allows(self, values: Values) -> bool:
        if self.relation is not None:
            return tuple(values) in self.relation
        if self.predicate is not None:
            return bool(self.predicate(tuple(values)))
        return self.function(tuple(values[:-1])) == values[-1]


@dataclass(frozen=True)
class SoftConstraint:
    """Sparse weights over tuples of ``scope``; unlisted tuples weigh zero."""

    scope: Tuple[Hashable, ...]
    weights: Mapping[Values, Fraction]

    def weight(self, values: Values) -> Fraction:
        return self.weights.get(tuple(values), Fraction(0))


@dataclass
class CspSolution:
    assignment: Dict[Hashable, int]
    weight: Fraction


class CspInstance:
    """Variables with finite integer domains, hard constraints and soft constraints."""

    def __init__(self):
        self.variables: List[Hashable] = []
        self.index: Dict[Hashable, int] = {}
        self.domains: Dict[Hashable, Tuple[int, ...]] = {}
        self.hard: List[HardConstraint] = []
        self.soft: List[SoftConstraint] = []

    def add_variable(self, var: Hashable, domain: Iterable[int]) -> int:
        if var in self.index:
            raise ValidationError(f"CSP variable {var} declared twice")
        self.index[var] = len(self.variables)
        self.variables.append(var)
        self.domains[var] = tuple(sorted(set(int(x) for x in domain)))
        return self.index[var]

    def _check_scope(self, scope: Sequence[Hashable]) -> Tuple[Hashable, ...]:
        for var in scope:
            if var not in self.index:
                raise ValidationError(f"Scope mentions undeclared variable {var}")
        return tuple(scope)

    def add_relation(self, scope: Sequence[Hashable], tuples: Iterable[Sequence[int]],
                     name: str = "") -> HardConstraint:
        scope = self._check_scope(scope)
        relation = frozenset(tuple(t) for t in tuples)
        for t in relation:
            if len(t) != len(scope):
                raise ValidationError(f"Tuple {t} does not match the scope of '{name}'")
            if any(x not in self.domains[var] for x, var in zip(t, scope)):
                raise ValidationError(f"Tuple {t} of '{name}' leaves the domain product")
        hc = HardConstraint(scope, relation=relation, name=name)
        self.hard.append(hc)
        return hc

    def add_predicate(self, scope: Sequence[Hashable], predicate: Callable[[Values], bool],
                      name: str = "") -> HardConstraint:
        hc = HardConstraint(self._check_scope(scope), predicate=predicate, name=name)
        self.hard.append(hc)
        return hc

    def add_function(self, inputs: Sequence[Hashable], output: Hashable,
                     function: Callable[[Values], Optional[int]], name: str = "") -> HardConstraint:
        hc = HardConstraint(self._check_scope(tuple(inputs) + (output,)), function=function, name=name)
        self.hard.append(hc)
        return hc

    def add_soft(self, scope: Sequence[Hashable], weights: Mapping[Sequence[int], Union[int, Fraction]]) -> None:
        scope = self._check_scope(scope)
        sparse = {tuple(t): Fraction(w) for t, w in weights.items() if w != 0}
        if sparse:
            self.soft.append(SoftConstraint(scope, sparse))

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def is_feasible(self, assignment: Mapping[Hashable, int]) -> bool:
        if any(assignment[var] not in self.domains[var] for var in self.variables):
            return False
        return all(hc.allows(tuple(assignment[v] for v in hc.scope)) for hc in self.hard)

    def weight(self, assignment: Mapping[Hashable, int]) -> Fraction:
        return sum((sc.weight(tuple(assignment[v] for v in sc.scope)) for sc in self.soft), Fraction(0))

    def restricted(self, pins: Mapping[Hashable, int]) -> "CspInstance":
        """Copy with the domains of ``pins`` reduced to the pinned value."""
        out = CspInstance()
        for var in self.variables:
            domain = self.domains[var]
            if var in pins:
                domain = tuple(x for x in domain if x == pins[var])
            out.add_variable(var, domain)
        out.hard = list(self.hard)
        out.soft = list(self.soft)
        return out

    @property
    def domain_size(self) -> int:
        return sum(len(d) for d in self.domains.values())

    @property
    def hard_size(self) -> int:
        return sum(len(hc.scope) * (len(hc.relation) if hc.relation is not None else 1) for hc in self.hard)

    @property
    def soft_size(self) -> int:
        return sum(len(sc.scope) * len(sc.weights) for sc in self.soft)

    def stats(self) -> Dict[str, int]:
        return {"variables": len(self.variables), "hard": len(self.hard), "soft": len(self.soft),
                "domain_size": self.domain_size, "hard_size": self.hard_size, "soft_size": self.soft_size}


def constraint_graph(inst: CspInstance) -> Graph:
    """Vertices are variables in declaration order; scopes become cliques."""
    edges = set()
    for scope in itertools.chain((hc.scope for hc in inst.hard), (sc.scope for sc in inst.soft)):
        ids = sorted(inst.index[v] for v in scope)
        edges.update(itertools.combinations(ids, 2))
    return Graph(len(inst.variables), sorted(edges))


def iter_feasible(inst: CspInstance, order: Optional[Sequence[Hashable]] = None,
                  node_cap: int = 2_000_000) -> Iterator[Dict[Hashable, int]]:
    """Every feasible assignment by backtracking in ``order``.

    A constraint is checked as soon as its whole scope is assigned; functional
    outputs are computed instead of enumerated when their inputs are known.

    Raises:
        ResourceLimit: after ``node_cap`` search nodes
    """
    order = list(order or inst.variables)
    if sorted(map(inst.index.get, order)) != list(range(len(inst.variables))):
        raise ValidationError("Search order must list every CSP variable once")
    position = {var: k for k, var in enumerate(order)}
    due: List[List[HardConstraint]] = [[] for _ in order]
    for hc in inst.hard:
        last = max((position[v] for v in hc.scope), default=0)
        due[last].append(hc)
    computed: Dict[int, HardConstraint] = {}
    for hc in inst.hard:
        if hc.function is not None:
            out = position[hc.output]
            if all(position[v] < out for v in hc.scope[:-1]):
                computed.setdefault(out, hc)

    assignment: Dict[Hashable, int] = {}
    nodes = 0

    def search(k: int) -> Iterator[Dict[Hashable, int]]:
        nonlocal nodes
        if k == len(order):
            yield dict(assignment)
            return
        var = order[k]
        if k in computed:
            hc = computed[k]
            value = hc.function(tuple(assignment[v] for v in hc.scope[:-1]))
            candidates: Sequence[int] = (value,) if value is not None and value in inst.domains[var] else ()
        else:
            candidates = inst.domains[var]
        for value in candidates:
            nodes += 1
            if nodes > node_cap:
                raise ResourceLimit(f"Feasibility enumeration exceeded {node_cap} nodes")
            assignment[var] = value
            if all(hc.allows(tuple(assignment[v] for v in hc.scope)) for hc in due[k]):
                yield from search(k + 1)
            del assignment[var]

    yield from search(0)


def exhaustive_minimum(inst: CspInstance, node_cap: int = 2_000_000) -> Optional[CspSolution]:
    """Minimum-weight feasible assignment by enumeration; the first one wins ties."""
    best: Optional[CspSolution] = None
    for assignment in iter_feasible(inst, node_cap=node_cap):
        w = inst.weight(assignment)
        if best is None or w < best.weight:
            best = CspSolution(assignment, w)
    return best


# ----------------------------------------------------------------------------
# Dump format
# ----------------------------------------------------------------------------

def _weight_text(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def format_csp(inst: CspInstance) -> str:
    lines = ["[vars]"]
    lines.extend(f"{k} {var}" for k, var in enumerate(inst.variables))
    lines.append("[domains]")
    lines.extend(f"{k} {' '.join(map(str, inst.domains[var]))}" for k, var in enumerate(inst.variables))
    lines.append("[hard]")
    for hc in inst.hard:
        scope = " ".join(str(inst.index[v]) for v in hc.scope)
        if hc.relation is not None:
            body = "relation " + " ".join("(" + ",".join(map(str, t)) + ")" for t in sorted(hc.relation))
        else:
            body = "function" if hc.function is not None else "predicate"
        lines.append(f"{hc.name or '-'} scope {scope} : {body}".rstrip())
    lines.append("[soft]")
    for sc in inst.soft:
        scope = " ".join(str(inst.index[v]) for v in sc.scope)
        weights = " ".join("(" + ",".join(map(str, t)) + f")={_weight_text(w)}" for t, w in sorted(sc.weights.items()))
        lines.append(f"scope {scope} : {weights}")
    return "\n".join(lines) + "\n"


def write_csp(inst: CspInstance, path: Union[str, Path]) -> None:
    Path(path).write_text(format_csp(inst))
    logger.info(f"Wrote CSP dump with {len(inst.variables)} variables to {path}")
