"""
Witness verification and the brute-force solving oracle.
"""
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from .naive import ModelChecker, from_mask, to_mask
from ..logic.constraints import PreEvaluation, eval_global
from ..logic.formula import FALSE, substitute_cards
from ..logic.instance import Instance, SolveResult, sizes_of
from ..utils.config_manager import Limits
from ..utils.exceptions import ResourceLimit

logger = logging.getLogger(__name__)


def local_violation(inst: Instance, masks: Sequence[int]) -> Optional[Tuple[int, int, int]]:
    """First ``(i, v, count)`` whose count is not admitted, or None."""
    g = inst.graph
    for i, v, lc in inst.local_constraints.constraints():
        count = bin(g.adj_mask[v] & masks[i]).count("1")
        in_cond = True if lc.condition is None else bool(masks[lc.condition] >> v & 1)
        if not lc.admits(count, in_cond):
            return i, v, count
    return None


def actual_pre_evaluation(inst: Instance, sizes: Sequence[int]) -> PreEvaluation:
    """The pre-evaluation an assignment with these sizes complies with."""
    return PreEvaluation.of({gc.cid: eval_global(gc, sizes) for gc in inst.global_constraints})


def verify_assignment(inst: Instance, assignment: Sequence[frozenset],
                      limits: Optional[Limits] = None) -> Tuple[bool, Optional[str]]:
    """Independent witness check: formula, global and local constraints.

    Returns ``(ok, reason)`` with a human-readable reason on failure.
    """
    limits = limits or Limits()
    if len(assignment) != inst.ell:
        return False, f"witness has {len(assignment)} sets, formula has {inst.ell} free variables"
    for part in assignment:
        if any(not 0 <= v < inst.n for v in part):
            return False, "witness names a vertex outside the graph"
    masks = [to_mask(part) for part in assignment]
    bad = local_violation(inst, masks)
    if bad is not None:
        i, v, count = bad
        return False, f"local constraint of X{i + 1} at vertex {v + 1} rejects count {count}"
    beta = actual_pre_evaluation(inst, sizes_of(tuple(assignment)))
    residue = substitute_cards(inst.formula.body, beta)
    checker = ModelChecker(inst.graph, limits.mc_work_cap)
    names = inst.formula.free_vars
    if not checker.holds(residue, dict(zip(names, masks))):
        return False, f"formula is false under the witness (pre-evaluation {beta})"
    return True, None


def brute_force_solve(inst: Instance, limits: Optional[Limits] = None) -> SolveResult:
    """Enumerate all ``2**(l*n)`` assignments; minimum weight wins, the first one on ties.

    Raises:
        ResourceLimit: when ``l * n`` exceeds ``limits.brute_force_cap``
    """
    limits = limits or Limits()
    n, ell = inst.n, inst.ell
    if ell * n > limits.brute_force_cap:
        raise ResourceLimit(f"Brute force needs l*n <= {limits.brute_force_cap}, got {ell * n}")

    checker = ModelChecker(inst.graph, limits.mc_work_cap)
    names = inst.formula.free_vars
    weighted = inst.has_weights
    weight_tables: List[Dict[int, int]] = [dict() for _ in range(ell)]

    def mask_weight(i: int, mask: int) -> int:
        table = weight_tables[i]
        if mask not in table:
            table[mask] = sum(inst.weight(i, v) for v in from_mask(mask))
        return table[mask]

    residues: Dict[Tuple[int, ...], object] = {}
    best: Optional[Tuple[int, ...]] = None
    best_weight: Optional[int] = None
    checked = 0
    for masks in itertools.product(range(1 << n), repeat=ell):
        checked += 1
        weight = sum(mask_weight(i, m) for i, m in enumerate(masks)) if weighted else 0
        if best_weight is not None and weight >= best_weight:
            continue
        if local_violation(inst, masks) is not None:
            continue
        sizes = tuple(bin(m).count("1") for m in masks)
        residue = residues.get(sizes)
        if residue is None:
            residue = substitute_cards(inst.formula.body, actual_pre_evaluation(inst, sizes))
            residues[sizes] = residue
        if residue == FALSE:
            continue
        if not checker.holds(residue, dict(zip(names, masks))):
            continue
        best, best_weight = masks, weight
        if not weighted:
            break

    logger.debug(f"Brute force checked {checked} assignments")
    if best is None:
        return SolveResult.unsat(solver="bruteforce", checked=checked)
    return SolveResult.sat(inst, [from_mask(m) for m in best], solver="bruteforce", checked=checked)
