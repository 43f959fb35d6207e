"""
Treewidth solver: one CSP per pre-evaluation, solved by the Freuder DP along
the augmented decomposition.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .automaton import TreeAutomaton, compile_formula
from .encoder import EncodedInstance, encode_instance
from ..core.treedecomp import NiceTreeDecomposition, heuristic_tree_decomposition, make_nice
from ..csp.freuder import freuder_solve
from ..csp.instance import write_csp
from ..logic.constraints import PreEvaluation, compliance_check
from ..logic.formula import Formula, residues
from ..logic.instance import Assignment, Instance, SolveResult, sizes_of
from ..utils.config_manager import Limits
from ..utils.exceptions import Infeasible, ResourceLimit, ValidationError
from ..utils.logger import log_audit

logger = logging.getLogger("msoext_cli.tw.solver")

BACKENDS = ("automaton", "bruteforce")


@dataclass
class _Found:
    beta: PreEvaluation
    encoded: EncodedInstance
    assignment: Optional[Assignment] = None
    weight: Optional[int] = None


def nice_decomposition(inst: Instance, limits: Limits) -> NiceTreeDecomposition:
    g = inst.graph
    return make_nice(g, heuristic_tree_decomposition(
        g, exact=g.n <= limits.exact_tw_limit, exact_limit=limits.exact_tw_limit))


def _solve_residue(inst: Instance, ntd: NiceTreeDecomposition, backend: str, limits: Limits,
                   work: Tuple[PreEvaluation, Formula]) -> _Found:
    beta, residue = work
    automaton: Optional[TreeAutomaton] = None
    if backend == "automaton":
        automaton = compile_formula(residue, inst.formula.free_vars, inst.graph)
    encoded = encode_instance(inst, ntd, beta, residue, automaton, limits)
    found = _Found(beta, encoded)
    try:
        solution = freuder_solve(encoded.csp, encoded.td, limits)
    except Infeasible:
        logger.debug(f"Pre-evaluation {beta} has no witness")
        return found
    assignment = encoded.decode(solution.assignment, inst.ell, inst.n)
    if not compliance_check(sizes_of(assignment), beta, inst.global_constraints):
        logger.error(f"Witness for {beta} does not comply with its pre-evaluation")
        return found
    found.assignment = assignment
    found.weight = inst.assignment_weight(assignment)
    return found


def solve_tw(inst: Instance, ntd: Optional[NiceTreeDecomposition] = None, limits: Optional[Limits] = None,
             backend: str = "automaton", emit_csp: Optional[Union[str, Path]] = None,
             jobs: int = 1) -> SolveResult:
    """Decide ``inst`` by dynamic programming over a nice tree decomposition.

    Weighted instances get a minimum-weight witness; ties go to the first
    pre-evaluation in enumeration order.

    Raises:
        UnsupportedPredicate: when the automaton backend meets a formula outside its library
        ResourceLimit: on table or brute-force caps
    """
    limits = limits or Limits()
    if backend not in BACKENDS:
        raise ValidationError(f"Unknown backend '{backend}', expected one of {', '.join(BACKENDS)}")
    if backend == "bruteforce" and inst.ell * inst.n > limits.brute_force_cap:
        raise ResourceLimit(f"Bruteforce backend needs l*n <= {limits.brute_force_cap}, "
                            f"got {inst.ell * inst.n}")
    if ntd is None:
        ntd = nice_decomposition(inst, limits)
    problem = ntd.check_nice()
    if problem:
        raise ValidationError(f"Decomposition is not nice: {problem}")

    work = list(residues(inst.formula))
    run = partial(_solve_residue, inst, ntd, backend, limits)
    logger.info(f"Treewidth solver: width {ntd.width}, {ntd.size} nodes, "
                f"{len(work)} pre-evaluations, backend {backend}")

    outcomes: List[_Found] = []
    if jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, work))
    else:
        for item in work:
            outcomes.append(run(item))
            if outcomes[-1].assignment is not None and not inst.has_weights:
                break

    details: Dict[str, object] = {"solver": "tw", "backend": backend, "width": ntd.width,
                                  "pre_evaluations": len(work)}
    if outcomes:
        details["csp_width"] = max(o.encoded.td.width for o in outcomes)
        details["extras_per_node"] = max(o.encoded.extras_per_node for o in outcomes)
        details["csp"] = outcomes[-1].encoded.csp.stats()
    hits = [o for o in outcomes if o.assignment is not None]
    best: Optional[_Found] = None
    for o in hits:
        if best is None or (inst.has_weights and o.weight < best.weight):
            best = o

    if emit_csp is not None and outcomes:
        write_csp((best or outcomes[-1]).encoded.csp, emit_csp)
    if best is None:
        return SolveResult.unsat(**details)
    log_audit(f"tw accepted beta={best.beta} weight={best.weight}")
    return SolveResult.sat(inst, best.assignment, beta=str(best.beta), **details)
