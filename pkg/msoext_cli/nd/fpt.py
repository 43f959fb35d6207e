"""
Solver for linear global and interval local constraints on graphs of small
neighborhood diversity.

For every pre-evaluation and every shape that satisfies the residual formula,
an integer program over cell counts decides whether the constraints can be
met; a solution is realized by picking vertices per cell.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.graph import NeighborhoodDecomposition, TypeGraph, nd_decomposition, type_graph
from ..eval.naive import ModelChecker
from ..eval.shapes import Shape, ShrunkGraph, enumerate_shapes, label_refined, shape_admissible, shrink_graph
from ..logic.constraints import PreEvaluation, compliance_check
from ..logic.formula import Formula, quantifier_counts, residues
from ..logic.instance import Assignment, Instance, SolveResult, sizes_of
from ..utils.config_manager import Limits
from ..utils.exceptions import Infeasible, UnsupportedFragment
from ..utils.logger import log_audit
from .ilp import IlpSolver, build_ilp, cell_counts
from .realize import realize_cells
from .refine import UniformAlpha, refine_uniform

logger = logging.getLogger("msoext_cli.nd.fpt")


def check_linear_fragment(inst: Instance) -> None:
    """Raise UnsupportedFragment unless globals are linear and locals are unconditional intervals."""
    for gc in inst.global_constraints:
        if not gc.is_linear:
            raise UnsupportedFragment(f"Global constraint {gc.cid} is not linear; use the XP solver")
    for i, v, lc in inst.local_constraints.constraints():
        if not lc.is_interval:
            raise UnsupportedFragment(
                f"Local constraint of X{i + 1} at vertex {v + 1} is not a single unconditional interval")


@dataclass(order=True)
class Candidate:
    weight: int
    witness: Tuple[Tuple[int, ...], ...]
    assignment: Assignment = field(compare=False)
    beta: PreEvaluation = field(compare=False)
    certificate: str = field(compare=False)


def candidate(inst: Instance, assignment: Assignment, beta: PreEvaluation, certificate: str) -> Candidate:
    witness = tuple(tuple(sorted(part)) for part in assignment)
    return Candidate(inst.assignment_weight(assignment), witness, assignment, beta, certificate)


@dataclass
class _Context:
    inst: Instance
    nd: NeighborhoodDecomposition
    tg: TypeGraph
    alpha: UniformAlpha
    shapes: Sequence[Shape]
    shrunk: ShrunkGraph
    limits: Limits


@dataclass
class _Outcome:
    best: Optional[Candidate] = None
    admissible: int = 0
    ilp_nodes: int = 0


def _solve_beta(ctx: _Context, work: Tuple[PreEvaluation, Formula]) -> _Outcome:
    beta, residue = work
    inst = ctx.inst
    weighted = inst.has_weights
    checker = ModelChecker(ctx.shrunk.graph, ctx.limits.mc_work_cap)
    out = _Outcome()
    for sh in ctx.shapes:
        if not shape_admissible(sh, inst.graph, ctx.nd, residue, inst.formula.free_vars,
                                shrunk=ctx.shrunk, checker=checker):
            continue
        out.admissible += 1
        ilp = build_ilp(sh, beta, ctx.nd, ctx.tg, ctx.alpha, inst.global_constraints)
        solver = IlpSolver(ilp, ctx.limits.ilp_node_cap)
        try:
            for point in solver.solutions():
                assignment = realize_cells(inst, ctx.nd, cell_counts(point, ctx.nd.nu, inst.ell))
                if assignment is None:
                    continue
                if not compliance_check(sizes_of(assignment), beta, inst.global_constraints):
                    logger.error(f"Realization of shape {sh} does not comply with {beta}")
                    continue
                found = candidate(inst, assignment, beta, str(sh))
                if out.best is None or found < out.best:
                    out.best = found
                if not weighted:
                    return out
        finally:
            out.ilp_nodes += solver.nodes
    return out


def solve_fpt_lin(inst: Instance, limits: Optional[Limits] = None, jobs: int = 1) -> SolveResult:
    """Decide a linear-fragment instance; weighted instances get a minimum-weight witness.

    Raises:
        UnsupportedFragment: on non-linear globals or non-interval locals
        ResourceLimit: on the shape, ILP or evaluation caps
    """
    limits = limits or Limits()
    check_linear_fragment(inst)
    g = inst.graph
    nd = label_refined(g, nd_decomposition(g))
    try:
        nd, alpha = refine_uniform(g, nd, inst.local_constraints)
    except Infeasible as e:
        logger.info(f"Local constraints are unsatisfiable: {e}")
        return SolveResult.unsat(solver="fpt", reason=str(e))

    tg = type_graph(g, nd)
    t = quantifier_counts(inst.formula.body)[2]
    shapes = list(enumerate_shapes(nd, t, inst.ell, limits.max_shapes))
    shrunk = shrink_graph(g, nd, t + 1, inst.ell)
    logger.info(f"FPT solver: {nd.nu} types, threshold {t}, {len(shapes)} shapes")

    ctx = _Context(inst, nd, tg, alpha, shapes, shrunk, limits)
    work = list(residues(inst.formula))
    run = partial(_solve_beta, ctx)
    details: Dict[str, object] = {"solver": "fpt", "types": nd.nu, "threshold": t,
                                  "shapes": len(shapes), "pre_evaluations": len(work)}

    outcomes: List[_Outcome] = []
    if jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, work))
    else:
        for item in work:
            outcomes.append(run(item))
            if outcomes[-1].best is not None and not inst.has_weights:
                break

    details["admissible_shapes"] = sum(o.admissible for o in outcomes)
    details["ilp_nodes"] = sum(o.ilp_nodes for o in outcomes)
    found = [o.best for o in outcomes if o.best is not None]
    if not found:
        return SolveResult.unsat(**details)
    best = min(found) if inst.has_weights else found[0]
    log_audit(f"fpt accepted beta={best.beta} shape={best.certificate} weight={best.weight}")
    return SolveResult.sat(inst, best.assignment, beta=str(best.beta), shape=best.certificate, **details)
