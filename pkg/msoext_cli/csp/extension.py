"""
Integer programs as CSPs, extension checks, and decompositions augmented by
per-node extra variables.
"""
import itertools
import logging
import math
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .instance import CspInstance, iter_feasible
from ..core.treedecomp import TreeDecomposition
from ..nd.ilp import IlpInstance, Row
from ..utils.exceptions import LocalityViolation, ValidationError

logger = logging.getLogger("msoext_cli.csp.extension")

MATERIALIZE_LIMIT = 4096


def _row_predicate(row: Row, positions: Dict[int, int]):
    coeffs = [(positions[k], a) for k, a in row.terms]

    def holds(values: Tuple[int, ...]) -> bool:
        lhs = sum(a * values[p] for p, a in coeffs)
        if row.sense == "<=":
            return lhs <= row.rhs
        if row.sense == ">=":
            return lhs >= row.rhs
        if row.sense == "=":
            return lhs == row.rhs
        return lhs != row.rhs

    return holds


def ilp_to_csp(ilp: IlpInstance, materialize_limit: int = MATERIALIZE_LIMIT) -> CspInstance:
    """One hard constraint per row over the row's support.

    Rows whose support spans at most ``materialize_limit`` domain tuples get an
    explicit relation; larger ones stay as predicates.
    """
    csp = CspInstance()
    for key, lo, hi in zip(ilp.keys, ilp.lower, ilp.upper):
        csp.add_variable(key, range(lo, hi + 1))
    for r, row in enumerate(ilp.rows):
        support = [k for k, _ in row.terms]
        scope = [ilp.keys[k] for k in support]
        holds = _row_predicate(row, {k: p for p, k in enumerate(support)})
        name = f"{row.tag}#{r}"
        domains = [csp.domains[var] for var in scope]
        if math.prod(len(d) for d in domains) <= materialize_limit:
            csp.add_relation(scope, (t for t in itertools.product(*domains) if holds(t)), name=name)
        else:
            csp.add_predicate(scope, holds, name=name)
    logger.debug(f"Translated ILP with {ilp.n_vars} variables and {len(ilp.rows)} rows")
    return csp


def projected_solutions(inst: CspInstance, onto: Sequence[Hashable],
                        node_cap: int = 2_000_000) -> Set[Tuple[int, ...]]:
    """Feasible assignments of ``inst`` restricted to ``onto``."""
    rest = [v for v in inst.variables if v not in set(onto)]
    order = list(onto) + rest
    return {tuple(a[v] for v in onto) for a in iter_feasible(inst, order, node_cap)}


def check_extension(base: CspInstance, extended: CspInstance,
                    shared: Optional[Sequence[Hashable]] = None, node_cap: int = 2_000_000) -> bool:
    """Whether the feasible set of ``base`` is exactly the projection of ``extended``'s.

    Raises:
        ValidationError: when a shared variable is missing from either instance
        ResourceLimit: when enumeration exceeds ``node_cap`` nodes
    """
    shared = list(shared or base.variables)
    for var in shared:
        if var not in base.index or var not in extended.index:
            raise ValidationError(f"Shared variable {var} is missing from one of the instances")
    base_sets = projected_solutions(base, shared, node_cap)
    ext_sets = projected_solutions(extended, shared, node_cap)
    if base_sets != ext_sets:
        logger.info(f"Extension check failed: {len(base_sets - ext_sets)} base solutions missing, "
                    f"{len(ext_sets - base_sets)} spurious")
        return False
    return True


def augment_decomposition(td: TreeDecomposition, extras: Mapping[int, Iterable[int]],
                          scopes: Iterable[Sequence[int]] = ()) -> TreeDecomposition:
    """Add the extra variables of every node to its own bag and to the bags of its children.

    Each augmented bag holds the base bag plus at most two groups, its own and
    its parent's. ``scopes`` are checked for locality: each must fit inside
    one augmented bag, i.e. the base bag of some node plus the extras of that
    node and of its parent.

    Raises:
        ValidationError: when extra groups overlap each other or the base bags
        LocalityViolation: naming the first scope that fits no augmented bag
    """
    groups: Dict[int, frozenset] = {a: frozenset(extras.get(a, ())) for a in range(td.size)}
    base_vars = set().union(*td.bags) if td.bags else set()
    owner: Dict[int, int] = {}
    for a, group in groups.items():
        for x in group:
            if x in base_vars:
                raise ValidationError(f"Extra variable {x} already occurs in a base bag")
            if x in owner:
                raise ValidationError(f"Extra variable {x} belongs to nodes {owner[x]} and {a}")
            owner[x] = a

    bags: List[frozenset] = []
    for a, bag in enumerate(td.bags):
        p = td.parent[a]
        bags.append(bag | groups[a] | (groups[p] if p is not None else frozenset()))
    out = TreeDecomposition(tuple(bags), td.parent)

    for scope in scopes:
        s = set(scope)
        if not any(s <= bag for bag in bags):
            pair = next(((u, v) for u, v in itertools.combinations(sorted(s), 2)
                         if not any(u in bag and v in bag for bag in bags)), None)
            detail = f", e.g. edge {pair[0]}-{pair[1]}" if pair else ""
            raise LocalityViolation(f"Scope {sorted(s)} fits no augmented bag{detail}")
    return out


def augmentation_bound(td: TreeDecomposition, kappa_prime: int) -> int:
    """Width guaranteed by augment_decomposition with groups of at most ``kappa_prime`` variables."""
    return td.width + 2 * kappa_prime
