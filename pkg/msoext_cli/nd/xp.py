"""
Solver for arbitrary global and local constraints on graphs of small
neighborhood diversity.

An extended numerical assignment fixes, per type, how many vertices fall in
each exact cell. Everything the formula and the global constraints can see is
determined by it; the local constraints additionally need a placement of
concrete vertices, which is found by a flow per type.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from ..core.graph import NeighborhoodDecomposition, TypeGraph, nd_decomposition, type_graph
from ..eval.naive import ModelChecker
from ..eval.oracle import actual_pre_evaluation
from ..eval.shapes import Shape, label_refined, shape_admissible, shrink_graph
from ..logic.constraints import IntervalSet, LocalConstraintMap, PreEvaluation
from ..logic.formula import FALSE, TRUE, Formula, quantifier_counts, substitute_cards
from ..logic.instance import Assignment, Instance, SolveResult
from ..utils.config_manager import Limits
from ..utils.exceptions import ResourceLimit
from ..utils.logger import log_audit
from .fpt import Candidate, candidate
from .realize import realize_cells

logger = logging.getLogger("msoext_cli.nd.xp")


@dataclass(frozen=True)
class ExtendedNumericalAssignment:
    """Per type, per exact cell: the number of vertices placed there."""

    ell: int
    counts: Tuple[Tuple[int, ...], ...]

    def selected(self, i: int, j: int) -> int:
        return sum(c for cell, c in enumerate(self.counts[j]) if cell >> i & 1)

    def sizes(self) -> Tuple[int, ...]:
        return tuple(sum(self.selected(i, j) for j in range(len(self.counts))) for i in range(self.ell))

    def shape(self, t: int) -> Shape:
        return Shape(t, self.ell, tuple(tuple(min(c, t + 1) for c in row) for row in self.counts))

    def __str__(self):
        return "; ".join("[" + " ".join(map(str, row)) + "]" for row in self.counts)


Sigma = ExtendedNumericalAssignment
Prune = Callable[[Sequence[Tuple[int, ...]]], bool]


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered ways to write ``total`` as ``parts`` non-negative summands, lexicographically."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_sigma(nd: NeighborhoodDecomposition, ell: int,
                    prune: Optional[Prune] = None) -> Iterator[Sigma]:
    """All valid extended numerical assignments in lexicographic order.

    ``prune(prefix)`` sees the rows chosen for the first types and may
    return False to skip every completion of that prefix.
    """
    cells = 1 << ell
    rows = [list(compositions(len(members), cells)) for members in nd.types]
    prefix: List[Tuple[int, ...]] = []

    def extend() -> Iterator[Sigma]:
        if len(prefix) == nd.nu:
            yield Sigma(ell, tuple(prefix))
            return
        for row in rows[len(prefix)]:
            prefix.append(row)
            if prune is None or prune(prefix):
                yield from extend()
            prefix.pop()

    yield from extend()


# ----------------------------------------------------------------------------
# Formula and global constraints
# ----------------------------------------------------------------------------

class SigmaEvaluator:
    """Decides the formula under the pre-evaluation a sigma induces, with caching.

    Verdicts are cached per (pre-evaluation, shape): two sigmas with equal
    capped counts agree on every formula with the instance's threshold.
    """

    def __init__(self, inst: Instance, nd: NeighborhoodDecomposition, limits: Optional[Limits] = None):
        limits = limits or Limits()
        self.inst = inst
        self.nd = nd
        self.t = quantifier_counts(inst.formula.body)[2]
        self.shrunk = shrink_graph(inst.graph, nd, self.t + 1, inst.ell)
        self.checker = ModelChecker(self.shrunk.graph, limits.mc_work_cap)
        self._residues: Dict[PreEvaluation, Formula] = {}
        self._verdicts: Dict[Tuple[PreEvaluation, Shape], bool] = {}

    def pre_evaluation(self, sigma: Sigma) -> PreEvaluation:
        return actual_pre_evaluation(self.inst, sigma.sizes())

    def models(self, sigma: Sigma) -> bool:
        beta = self.pre_evaluation(sigma)
        residue = self._residues.get(beta)
        if residue is None:
            residue = substitute_cards(self.inst.formula.body, beta)
            self._residues[beta] = residue
        if residue == FALSE:
            return False
        if residue == TRUE:
            return True
        sh = sigma.shape(self.t)
        key = (beta, sh)
        verdict = self._verdicts.get(key)
        if verdict is None:
            verdict = shape_admissible(sh, self.inst.graph, self.nd, residue, self.inst.formula.free_vars,
                                       shrunk=self.shrunk, checker=self.checker)
            self._verdicts[key] = verdict
        return verdict


def sigma_models(inst: Instance, nd: NeighborhoodDecomposition, sigma: Sigma,
                 limits: Optional[Limits] = None) -> bool:
    """Whether every realization of ``sigma`` satisfies the formula and its global constraints.

    ``nd`` must separate differently labelled vertices.
    """
    return SigmaEvaluator(inst, nd, limits).models(sigma)


# ----------------------------------------------------------------------------
# Local constraints
# ----------------------------------------------------------------------------

def neighbor_counts(sigma: Sigma, tg: TypeGraph) -> Tuple[Tuple[int, ...], ...]:
    """``s[i][j]``: X_i-vertices in the closed type neighborhood of type j."""
    return tuple(
        tuple(sum(sigma.selected(i, k) for k in tg.neighbors(j)) for j in range(tg.nu))
        for i in range(sigma.ell)
    )


def _reachable(lmap: LocalConstraintMap, i: int, v: int) -> IntervalSet:
    lc = lmap.get(i, v)
    return lc.allowed if lc.allowed_out is None else lc.allowed.union(lc.allowed_out)


@dataclass(frozen=True)
class CliqueWindow:
    """Per clique type and variable: vertices that must be in X_i, must be out, or may be either."""

    i: int
    j: int
    s: int
    forced_in: int
    forced_out: int
    either: int
    selected: int

    @property
    def fits(self) -> bool:
        return self.forced_in <= self.selected <= self.forced_in + self.either

    @property
    def fits_by_neighborhood(self) -> bool:
        return self.forced_in <= self.s <= self.forced_in + self.either


@dataclass
class Possibility:
    ok: bool
    reason: Optional[str] = None
    windows: List[CliqueWindow] = field(default_factory=list)
    discrepancies: List[str] = field(default_factory=list)


def possibly_satisfied(sigma: Sigma, nd: NeighborhoodDecomposition, tg: TypeGraph,
                       lmap: LocalConstraintMap) -> Possibility:
    """Necessary conditions on ``sigma`` for some realization to meet the local constraints.

    Conditional constraints are relaxed to the union of both sets.
    """
    s = neighbor_counts(sigma, tg)
    out = Possibility(True)
    for i in range(sigma.ell):
        for j, members in enumerate(nd.types):
            count = s[i][j]
            if not nd.is_clique(j):
                for v in members:
                    if lmap.is_declared(i, v) and count not in _reachable(lmap, i, v):
                        out.ok = False
                        out.reason = f"vertex {v + 1} cannot see {count} vertices of X{i + 1}"
                        return out
                continue
            forced_in = forced_out = either = 0
            for v in members:
                allowed = _reachable(lmap, i, v)
                as_member = count >= 1 and (count - 1) in allowed
                as_other = count in allowed
                if not as_member and not as_other:
                    out.ok = False
                    out.reason = f"vertex {v + 1} admits neither {count - 1} nor {count} for X{i + 1}"
                    return out
                if as_member and as_other:
                    either += 1
                elif as_member:
                    forced_in += 1
                else:
                    forced_out += 1
            window = CliqueWindow(i, j, count, forced_in, forced_out, either, sigma.selected(i, j))
            out.windows.append(window)
            if window.fits != window.fits_by_neighborhood:
                out.discrepancies.append(
                    f"window for X{i + 1} on type {j}: selected={window.selected} fits={window.fits}, "
                    f"neighborhood sum={window.s} fits={window.fits_by_neighborhood}")
            if not window.fits:
                out.ok = False
                out.reason = (f"type {j} needs {forced_in}..{forced_in + either} vertices of X{i + 1}, "
                              f"sigma selects {window.selected}")
                return out
    return out


def compatibility(inst: Instance, nd: NeighborhoodDecomposition, tg: TypeGraph, sigma: Sigma):
    """``compatible(v, j, cell)``: v may sit in ``cell`` without breaking its local constraints."""
    s = neighbor_counts(sigma, tg)
    lmap = inst.local_constraints
    declared = [[i for i in range(inst.ell) if lmap.is_declared(i, v)] for v in range(inst.n)]

    def compatible(v: int, j: int, cell: int) -> bool:
        for i in declared[v]:
            lc = lmap.get(i, v)
            count = s[i][j] - (1 if nd.is_clique(j) and cell >> i & 1 else 0)
            in_cond = True if lc.condition is None else bool(cell >> lc.condition & 1)
            if not lc.admits(count, in_cond):
                return False
        return True

    return compatible


def partial_interval_prune(inst: Instance, nd: NeighborhoodDecomposition, tg: TypeGraph) -> Prune:
    """Reject prefixes whose neighbor counts can no longer reach some vertex's constraint.

    For an assigned type the X_i-count its vertices see lies between the sum
    over assigned neighbor types and that sum plus the sizes of unassigned ones.
    """
    lmap = inst.local_constraints
    demands: List[List[List[IntervalSet]]] = []
    for members in nd.types:
        per_var = []
        for i in range(inst.ell):
            sets = {_reachable(lmap, i, v) for v in members if lmap.is_declared(i, v)}
            per_var.append(sorted(sets, key=lambda x: x.intervals))
        demands.append(per_var)
    sizes = [len(members) for members in nd.types]
    neighbors = [tg.neighbors(j) for j in range(nd.nu)]

    def prune(prefix: Sequence[Tuple[int, ...]]) -> bool:
        assigned = len(prefix)
        for i in range(inst.ell):
            chosen = [sum(c for cell, c in enumerate(row) if cell >> i & 1) for row in prefix]
            for j in range(assigned):
                if not demands[j][i]:
                    continue
                lb = sum(chosen[k] for k in neighbors[j] if k < assigned)
                ub = lb + sum(sizes[k] for k in neighbors[j] if k >= assigned)
                lo = max(lb - 1, 0) if nd.is_clique(j) else lb
                if not all(d.meets(lo, ub) for d in demands[j][i]):
                    return False
        return True

    return prune


# ----------------------------------------------------------------------------
# Solving
# ----------------------------------------------------------------------------

def solve_xp(inst: Instance, limits: Optional[Limits] = None) -> SolveResult:
    """Decide an instance with arbitrary global and local constraints.

    Raises:
        ResourceLimit: when more than ``limits.max_sigma`` assignments are visited
    """
    limits = limits or Limits()
    g = inst.graph
    nd = label_refined(g, nd_decomposition(g))
    tg = type_graph(g, nd)
    evaluator = SigmaEvaluator(inst, nd, limits)
    prune = partial_interval_prune(inst, nd, tg) if not inst.local_constraints.is_empty else None
    weighted = inst.has_weights
    logger.info(f"XP solver: {nd.nu} types, threshold {evaluator.t}")

    visited = realized = 0
    best: Optional[Candidate] = None
    best_sigma: Optional[Sigma] = None
    for sigma in enumerate_sigma(nd, inst.ell, prune):
        visited += 1
        if visited > limits.max_sigma:
            raise ResourceLimit(f"More than {limits.max_sigma} extended numerical assignments")
        verdict = possibly_satisfied(sigma, nd, tg, inst.local_constraints)
        for message in verdict.discrepancies:
            log_audit(f"xp sigma={sigma}: {message}")
        if not verdict.ok:
            continue
        if not evaluator.models(sigma):
            continue
        assignment = realize_cells(inst, nd, sigma.counts, compatibility(inst, nd, tg, sigma))
        if assignment is None:
            continue
        realized += 1
        found = candidate(inst, assignment, evaluator.pre_evaluation(sigma), str(sigma))
        if best is None or found < best:
            best, best_sigma = found, sigma
        if not weighted:
            break

    details = {"solver": "xp", "types": nd.nu, "threshold": evaluator.t, "sigmas": visited,
               "realized": realized}
    if best is None:
        return SolveResult.unsat(**details)
    log_audit(f"xp accepted beta={best.beta} sigma={best_sigma} weight={best.weight}")
    return SolveResult.sat(inst, best.assignment, beta=str(best.beta), sigma=best.certificate, **details)


def realizations(sigma: Sigma, nd: NeighborhoodDecomposition) -> Iterator[Assignment]:
    """Every assignment with the exact cell counts of ``sigma``; meant for small tests."""
    per_type = []
    for j, members in enumerate(nd.types):
        options = []
        labels = [cell for cell, c in enumerate(sigma.counts[j]) for _ in range(c)]
        for perm in set(itertools.permutations(labels)):
            options.append(list(zip(members, perm)))
        per_type.append(sorted(options))
    for combo in itertools.product(*per_type):
        parts: List[set] = [set() for _ in range(sigma.ell)]
        for placed in combo:
            for v, cell in placed:
                for i in range(sigma.ell):
                    if cell >> i & 1:
                        parts[i].add(v)
        yield tuple(frozenset(p) for p in parts)
