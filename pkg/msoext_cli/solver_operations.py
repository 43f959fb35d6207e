"""
Solver dispatch for the msoext CLI.

Picks the solver path for an instance (nd FPT, nd XP, treewidth or the
brute-force oracle), runs it, re-verifies every witness and assembles the
run report.
"""
import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from .core.graph import nd_decomposition
from .core.treedecomp import NiceTreeDecomposition
from .eval.oracle import brute_force_solve, verify_assignment
from .logic.constraints import IntervalSet
from .logic.instance import Fragment, Instance, SolveResult, check_fragment
from .nd.fpt import solve_fpt_lin
from .nd.xp import solve_xp
from .tw.solver import nice_decomposition, solve_tw
from .utils.config_manager import Limits
from .utils.exceptions import ValidationError, WitnessRejected
from .utils.validators import validate_variable_index

logger = logging.getLogger(__name__)

PARAMETERS = ("auto", "nd", "tw")

# Which result each path implements, for the report.
PATH_RESULTS = {
    "nd-fpt": "FPT in neighborhood diversity, linear global and interval local constraints",
    "nd-xp": "XP in neighborhood diversity, arbitrary global and local constraints",
    "tw": "FPT in treewidth via CSP extension and Freuder's algorithm",
    "oracle": "exhaustive search over all assignments",
}

Solver = Callable[[Instance], SolveResult]


@dataclass
class RunReport:
    """What one ``solve`` run produced; witnesses are 1-based."""

    verdict: str
    path: str
    parameters: Dict[str, Any]
    weight: Optional[int] = None
    witness: Optional[List[List[int]]] = None
    details: Dict[str, Any] = field(default_factory=dict)
    fair: Optional[int] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def as_dict(self, with_timings: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "verdict": self.verdict,
            "path": self.path,
            "result": PATH_RESULTS[self.path],
            "parameters": self.parameters,
            "details": self.details,
        }
        if self.weight is not None:
            out["weight"] = self.weight
        if self.witness is not None:
            out["witness"] = self.witness
        if self.fair is not None:
            out["fair"] = self.fair
        if with_timings:
            out["timings"] = {k: round(v, 4) for k, v in self.timings.items()}
        return out

    def to_json(self, with_timings: bool = False) -> str:
        return json.dumps(self.as_dict(with_timings), indent=2, sort_keys=True, default=str)


def solve_fair(inst: Instance, solver: Solver, i: int) -> Tuple[Optional[int], SolveResult]:
    """Minimize ``max_v |N(v) & X_i|`` (``i`` 1-based).

    Scans ``u = 0..n`` with every local set of ``X_i`` cut to ``[0, u]`` and
    returns the first satisfiable ``u`` with its result, or ``(None, unsat)``.
    """
    validate_variable_index(i, inst.ell)
    last = SolveResult.unsat()
    for u in range(inst.n + 1):
        lmap = inst.local_constraints.restricted(i - 1, IntervalSet.range(0, u))
        result = solver(replace(inst, local_constraints=lmap, fragment=None))
        if result.satisfiable:
            logger.info(f"Fair objective for X{i}: {u}")
            return u, result
        last = result
    return None, last


class SolverOperations:
    """Runs one instance through the solver paths."""

    def __init__(self, inst: Instance, limits: Optional[Limits] = None, backend: str = "automaton",
                 jobs: int = 1, ntd: Optional[NiceTreeDecomposition] = None):
        self.inst = inst
        self.limits = limits or Limits()
        self.backend = backend
        self.jobs = jobs
        self.ntd = ntd
        self.timings: Dict[str, float] = {}
        self._parameters: Optional[Dict[str, Any]] = None

    def parameters(self) -> Dict[str, Any]:
        """Instance size and structural parameters: n, m, l, nu and a heuristic treewidth."""
        if self._parameters is None:
            start = time.perf_counter()
            g = self.inst.graph
            if self.ntd is None:
                self.ntd = nice_decomposition(self.inst, self.limits)
            self._parameters = {
                "n": g.n,
                "m": g.m,
                "ell": self.inst.ell,
                "nu": nd_decomposition(g).nu,
                "tw": self.ntd.width,
                "globals": len(self.inst.global_constraints),
            }
            self.timings["parameters"] = time.perf_counter() - start
        return self._parameters

    def choose_path(self, param: str = "auto", fragment: Optional[Fragment] = None, oracle: bool = False) -> str:
        """Solver path for the requested parameter and fragment.

        ``auto`` takes the treewidth path when ``tw + 1 < nu`` and the
        neighborhood-diversity path otherwise.

        Raises:
            ValidationError: for an unknown parameter or a fragment the instance does not fit
        """
        if param not in PARAMETERS:
            raise ValidationError(f"Unknown parameter '{param}', expected one of {', '.join(PARAMETERS)}")
        tag = check_fragment(self.inst, fragment)
        if oracle:
            return "oracle"
        if param == "auto":
            params = self.parameters()
            param = "tw" if params["tw"] + 1 < params["nu"] else "nd"
        if param == "tw":
            return "tw"
        return "nd-fpt" if tag.linear else "nd-xp"

    def solver_for(self, path: str, emit_csp: Optional[Union[str, Path]] = None) -> Solver:
        if path == "oracle":
            return lambda inst: brute_force_solve(inst, self.limits)
        if path == "nd-fpt":
            return lambda inst: solve_fpt_lin(inst, self.limits, self.jobs)
        if path == "nd-xp":
            return lambda inst: solve_xp(inst, self.limits)
        if path != "tw":
            raise ValidationError(f"Unknown solver path '{path}'")
        if self.ntd is None:
            self.parameters()
        return lambda inst: solve_tw(inst, self.ntd, self.limits, self.backend, emit_csp, self.jobs)

    def verify(self, inst: Instance, result: SolveResult) -> None:
        """Re-check a SAT witness against formula, globals and locals.

        Raises:
            WitnessRejected: when the witness fails
        """
        if not result.satisfiable:
            return
        start = time.perf_counter()
        ok, reason = verify_assignment(inst, result.assignment, self.limits)
        self.timings["verify"] = self.timings.get("verify", 0.0) + time.perf_counter() - start
        if not ok:
            raise WitnessRejected(f"Solver witness rejected: {reason}")

    def solve(self, param: str = "auto", fragment: Optional[Fragment] = None, oracle: bool = False,
              emit_csp: Optional[Union[str, Path]] = None, fair: Optional[int] = None) -> RunReport:
        """Dispatch, solve, verify and report.

        Raises:
            ResourceLimit: when a solver cap is exceeded
            UnsupportedError: when the chosen path cannot handle the instance
            WitnessRejected: when a witness fails verification
        """
        path = self.choose_path(param, fragment, oracle)
        if emit_csp is not None and path != "tw":
            logger.warning(f"--emit-csp applies to the treewidth path only; {path} ran")
        solver = self.solver_for(path, emit_csp)
        logger.info(f"Solving on path {path}")

        start = time.perf_counter()
        fair_value: Optional[int] = None
        if fair is not None:
            checked: List[Tuple[Instance, SolveResult]] = []

            def checked_solver(inst: Instance) -> SolveResult:
                result = solver(inst)
                checked.append((inst, result))
                return result

            fair_value, result = solve_fair(self.inst, checked_solver, fair)
            verified_inst = checked[-1][0] if checked and fair_value is not None else self.inst
        else:
            result = solver(self.inst)
            verified_inst = self.inst
        self.timings["solve"] = time.perf_counter() - start

        self.verify(verified_inst, result)
        report = RunReport(
            verdict=result.status.value,
            path=path,
            parameters=self.parameters(),
            details=dict(result.details),
            fair=fair_value,
            timings=dict(self.timings),
        )
        if result.satisfiable:
            report.witness = [sorted(v + 1 for v in part) for part in result.assignment]
            if self.inst.has_weights:
                report.weight = result.weight
        return report
