"""
Integer programs over cell counts and an exact bounded branch-and-bound solver.

Variables are addressed by hashable keys:

    ("x", j, I)   vertices of type j in exact cell I
    ("y", i, j)   |X_i & T_j|
    ("z", i)      |X_i|
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from ..core.graph import NeighborhoodDecomposition, TypeGraph
from ..eval.shapes import Shape
from ..logic.constraints import GlobalConstraint, LinearConstraint, PreEvaluation
from ..utils.exceptions import (
    Infeasible, ResourceLimit, UnboundedVariable, UnsupportedFragment, ValidationError,
)
from .refine import UniformAlpha

logger = logging.getLogger("msoext_cli.nd.ilp")

ROW_SENSES = ("<=", "=", ">=", "!=")


@dataclass(frozen=True)
class Row:
    terms: Tuple[Tuple[int, Fraction], ...]
    sense: str
    rhs: Fraction
    tag: str

    def value(self, point: Sequence[int]) -> Fraction:
        return sum((a * point[k] for k, a in self.terms), Fraction(0))

    def holds(self, point: Sequence[int]) -> bool:
        lhs = self.value(point)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        if self.sense == "=":
            return lhs == self.rhs
        return lhs != self.rhs


class IlpInstance:
    """Bounded integer variables plus tagged linear rows."""

    def __init__(self):
        self.keys: List[Hashable] = []
        self.index: Dict[Hashable, int] = {}
        self.lower: List[int] = []
        self.upper: List[int] = []
        self.rows: List[Row] = []

    @property
    def n_vars(self) -> int:
        return len(self.keys)

    def add_var(self, key: Hashable, lo: int, hi: Optional[int]) -> int:
        if key in self.index:
            raise ValidationError(f"ILP variable {key} declared twice")
        if hi is None:
            raise UnboundedVariable(f"ILP variable {key} has no upper bound")
        self.index[key] = len(self.keys)
        self.keys.append(key)
        self.lower.append(int(lo))
        self.upper.append(int(hi))
        return self.index[key]

    def var(self, key: Hashable) -> int:
        try:
            return self.index[key]
        except KeyError:
            raise ValidationError(f"Row references undeclared ILP variable {key}")

    def add_row(self, terms: Iterable[Tuple[Hashable, int]], sense: str, rhs, tag: str) -> Row:
        if sense not in ROW_SENSES:
            raise ValidationError(f"Unknown row sense '{sense}'")
        merged: Dict[int, Fraction] = {}
        for key, coeff in terms:
            k = self.var(key)
            merged[k] = merged.get(k, Fraction(0)) + Fraction(coeff)
        row = Row(tuple(sorted((k, a) for k, a in merged.items() if a != 0)), sense, Fraction(rhs), tag)
        self.rows.append(row)
        return row

    def rows_tagged(self, tag: str) -> List[Row]:
        return [row for row in self.rows if row.tag == tag]

    def is_feasible_point(self, point: Sequence[int]) -> bool:
        if any(not lo <= x <= hi for x, lo, hi in zip(point, self.lower, self.upper)):
            return False
        return all(row.holds(point) for row in self.rows)

    def format(self) -> str:
        """Readable dump, one variable or row per line."""
        lines = [f"var {key} in [{lo}, {hi}]" for key, lo, hi in zip(self.keys, self.lower, self.upper)]
        for row in self.rows:
            lhs = " + ".join(f"{a}*{self.keys[k]}" for k, a in row.terms) or "0"
            lines.append(f"({row.tag}) {lhs} {row.sense} {row.rhs}")
        return "\n".join(lines)


# ----------------------------------------------------------------------------
# Building
# ----------------------------------------------------------------------------

def _integer_scaled(gc: LinearConstraint) -> Tuple[List[int], int]:
    scale = 1
    for value in (*gc.coeffs, gc.bound):
        scale = scale * value.denominator // math.gcd(scale, value.denominator)
    return [int(a * scale) for a in gc.coeffs], int(gc.bound * scale)


_NEGATED = {"<=": (">=", 1), ">=": ("<=", -1), "=": ("!=", 0)}


def add_global_rows(ilp: IlpInstance, globals_: Sequence[GlobalConstraint], beta: PreEvaluation,
                    ell: int) -> None:
    """Pin each linear global constraint to its guessed truth value."""
    for gc in globals_:
        if gc.cid not in beta:
            continue
        if not isinstance(gc, LinearConstraint):
            raise UnsupportedFragment(f"Global constraint {gc.cid} is not linear")
        coeffs, bound = _integer_scaled(gc)
        terms = [(("z", i), a) for i, a in enumerate(coeffs) if i < ell]
        if beta[gc.cid]:
            ilp.add_row(terms, gc.sense, bound, f"g:{gc.cid}")
        else:
            sense, shift = _NEGATED[gc.sense]
            ilp.add_row(terms, sense, bound + shift, f"g:{gc.cid}")


def build_ilp(sh: Shape, beta: PreEvaluation, nd: NeighborhoodDecomposition, tg: TypeGraph,
              alpha: UniformAlpha, globals_: Sequence[GlobalConstraint]) -> IlpInstance:
    """Integer program whose solutions are the cell counts of shape ``sh`` meeting all constraints.

    Args:
        sh: shape over the (refined) types of ``nd``
        beta: guessed truth values of the global constraints
        nd: neighborhood decomposition the shape and ``alpha`` refer to
        tg: its type graph
        alpha: uniform admissible counts per type and variable
        globals_: the linear global constraints
    """
    ell, t = sh.ell, sh.t
    cells = 1 << ell
    n = sum(len(members) for members in nd.types)
    ilp = IlpInstance()
    for j, members in enumerate(nd.types):
        for I in range(cells):
            ilp.add_var(("x", j, I), 0, len(members))
    for i in range(ell):
        for j, members in enumerate(nd.types):
            ilp.add_var(("y", i, j), 0, len(members))
    for i in range(ell):
        ilp.add_var(("z", i), 0, n)

    for j, members in enumerate(nd.types):
        ilp.add_row([(("x", j, I), 1) for I in range(cells)], "=", len(members), "0")
        for i in range(ell):
            terms = [(("x", j, I), 1) for I in range(cells) if I >> i & 1]
            ilp.add_row(terms + [(("y", i, j), -1)], "=", 0, "a1")
        for I in range(cells):
            value = sh.values[j][I]
            if value == sh.up:
                ilp.add_row([(("x", j, I), 1)], ">=", t + 1, "sh2")
            else:
                ilp.add_row([(("x", j, I), 1)], "=", value, "sh1")
    for i in range(ell):
        ilp.add_row([(("y", i, j), 1) for j in range(nd.nu)] + [(("z", i), -1)], "=", 0, "a2")

    add_global_rows(ilp, globals_, beta, ell)

    for j in range(nd.nu):
        around = tg.neighbors(j)
        for i in range(ell):
            allowed = alpha[j][i]
            if allowed.min == 0 and allowed.max is None:
                continue
            if not allowed.is_interval:
                raise UnsupportedFragment(f"Local constraint of X{i + 1} on type {j} is not an interval")
            terms = [(("y", i, k), 1) for k in around]
            if not nd.is_clique(j):
                _bounded(ilp, terms, allowed, 0, "lli")
                continue
            if sh.support(j, i, True) > 0:
                _bounded(ilp, terms, allowed, 1, "llc1")
            if sh.support(j, i, False) > 0:
                _bounded(ilp, terms, allowed, 0, "llc2")
    return ilp


def _bounded(ilp: IlpInstance, terms, allowed, offset: int, tag: str) -> None:
    """``allowed.min <= sum(terms) - offset <= allowed.max``."""
    if allowed.is_empty:
        ilp.add_row([], ">=", 1, tag)
        return
    if allowed.min > 0:
        ilp.add_row(terms, ">=", allowed.min + offset, tag)
    if allowed.max is not None:
        ilp.add_row(terms, "<=", allowed.max + offset, tag)


def variable_count(nu: int, ell: int) -> int:
    return nu * (1 << ell) + nu * ell + ell


# ----------------------------------------------------------------------------
# Solving
# ----------------------------------------------------------------------------

class IlpSolver:
    """Depth-first branch and bound with exact interval propagation.

    Branches on the variable with the smallest remaining domain, values in
    ascending order, so solutions come out in a deterministic order.
    """

    def __init__(self, ilp: IlpInstance, node_cap: int = 200_000):
        self.ilp = ilp
        self.node_cap = node_cap
        self.nodes = 0
        self._le: List[Tuple[Tuple[Tuple[int, Fraction], ...], Fraction]] = []
        for row in ilp.rows:
            if row.sense in ("<=", "="):
                self._le.append((row.terms, row.rhs))
            if row.sense in (">=", "="):
                self._le.append((tuple((k, -a) for k, a in row.terms), -row.rhs))

    def _propagate(self, lo: List[int], hi: List[int]) -> bool:
        changed = True
        while changed:
            changed = False
            for terms, bound in self._le:
                least = sum((a * lo[k] if a > 0 else a * hi[k] for k, a in terms), Fraction(0))
                if least > bound:
                    return False
                slack = bound - least
                for k, a in terms:
                    if a > 0:
                        cap = lo[k] + math.floor(slack / a)
                        if cap < hi[k]:
                            hi[k] = cap
                            changed = True
                    else:
                        floor_ = hi[k] - math.floor(slack / -a)
                        if floor_ > lo[k]:
                            lo[k] = floor_
                            changed = True
                    if lo[k] > hi[k]:
                        return False
        return True

    def solutions(self) -> Iterator[Dict[Hashable, int]]:
        """Every feasible point, lazily.

        Raises:
            ResourceLimit: when more than ``node_cap`` search nodes are needed
        """
        yield from self._search(list(self.ilp.lower), list(self.ilp.upper))

    def _search(self, lo: List[int], hi: List[int]) -> Iterator[Dict[Hashable, int]]:
        self.nodes += 1
        if self.nodes > self.node_cap:
            raise ResourceLimit(f"ILP search exceeded {self.node_cap} nodes")
        if not self._propagate(lo, hi):
            return
        open_vars = [k for k in range(len(lo)) if lo[k] < hi[k]]
        if not open_vars:
            if all(row.holds(lo) for row in self.ilp.rows):
                yield {key: lo[k] for k, key in enumerate(self.ilp.keys)}
            return
        k = min(open_vars, key=lambda v: (hi[v] - lo[v], v))
        for value in range(lo[k], hi[k] + 1):
            lo2, hi2 = list(lo), list(hi)
            lo2[k] = hi2[k] = value
            yield from self._search(lo2, hi2)


def solve_ilp(ilp: IlpInstance, node_cap: int = 200_000) -> Dict[Hashable, int]:
    """A feasible integer point of ``ilp``.

    Raises:
        Infeasible: when there is none
        ResourceLimit: on the node cap
    """
    solver = IlpSolver(ilp, node_cap)
    for point in solver.solutions():
        logger.debug(f"ILP with {ilp.n_vars} variables solved after {solver.nodes} nodes")
        return point
    raise Infeasible(f"ILP with {ilp.n_vars} variables and {len(ilp.rows)} rows is infeasible")


def cell_counts(point: Mapping[Hashable, int], nu: int, ell: int) -> Tuple[Tuple[int, ...], ...]:
    """The ``x`` part of a solution as per-type rows of exact cell counts."""
    return tuple(tuple(point[("x", j, I)] for I in range(1 << ell)) for j in range(nu))
