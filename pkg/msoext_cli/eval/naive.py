"""
Exhaustive MSO_1 evaluation over bitmask-encoded sets.
"""
import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from ..core.graph import Graph
from ..logic.formula import (
    And, Card, Connected, Const, Edge, ElemQuant, Equal, Formula, Iff, Implies, Label,
    Member, MSOFormula, Not, Or, SetQuant, EXISTS, free_variables,
)
from ..utils.exceptions import ResourceLimit, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_WORK_CAP = 5_000_000


def to_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def from_mask(mask: int) -> frozenset:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def mask_connected(g: Graph, mask: int) -> bool:
    """Whether ``G[mask]`` is connected; the empty set is."""
    if not mask:
        return True
    start = mask & -mask
    seen = start
    frontier = start
    while frontier:
        low = frontier & -frontier
        frontier ^= low
        v = low.bit_length() - 1
        new = g.adj_mask[v] & mask & ~seen
        seen |= new
        frontier |= new
    return seen == mask


def work_estimate(f: Formula, n: int) -> int:
    """Upper bound on node visits of unmemoized evaluation."""
    if isinstance(f, ElemQuant):
        return 1 + n * work_estimate(f.body, n)
    if isinstance(f, SetQuant):
        return 1 + (1 << n) * work_estimate(f.body, n)
    if isinstance(f, Connected):
        return 1 + n
    return 1 + sum(work_estimate(c, n) for c in f.children())


class ModelChecker:
    """Evaluates formulas on one graph, memoizing on the values of each node's free variables.

    The memo survives across calls, so checking many assignments against one
    graph reuses earlier work.
    """

    MEMO_LIMIT = 2_000_000

    def __init__(self, g: Graph, work_cap: int = DEFAULT_WORK_CAP):
        self.g = g
        self.work_cap = work_cap
        self.full = (1 << g.n) - 1
        self._free: Dict[int, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {}
        self._memo: Dict[tuple, bool] = {}
        self._checked: Dict[int, Formula] = {}

    def _free_of(self, f: Formula) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        key = id(f)
        entry = self._free.get(key)
        if entry is None:
            elems, sets = free_variables(f)
            entry = (tuple(sorted(elems)), tuple(sorted(sets)))
            self._free[key] = entry
        return entry

    def _admit(self, f: Formula) -> None:
        if id(f) in self._checked:
            return
        estimate = work_estimate(f, self.g.n)
        if estimate > self.work_cap:
            raise ResourceLimit(f"Evaluation work estimate {estimate} exceeds cap {self.work_cap} (n={self.g.n})")
        # keep the formula alive so its id stays unique
        self._checked[id(f)] = f

    def holds(self, f: Formula, sets: Mapping[str, int], elems: Optional[Mapping[str, int]] = None) -> bool:
        self._admit(f)
        if len(self._memo) > self.MEMO_LIMIT:
            self._memo.clear()
        return self._eval(f, dict(sets), dict(elems or {}))

    def _eval(self, f: Formula, sets: Dict[str, int], elems: Dict[str, int]) -> bool:
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Member):
            return bool(sets[f.set_var] >> elems[f.elem] & 1)
        if isinstance(f, Equal):
            return elems[f.left] == elems[f.right]
        if isinstance(f, Edge):
            return bool(self.g.adj_mask[elems[f.left]] >> elems[f.right] & 1)
        if isinstance(f, Label):
            return self.g.has_label(f.label, elems[f.elem])
        if isinstance(f, Connected):
            return mask_connected(self.g, sets[f.set_var])
        if isinstance(f, Card):
            raise ValidationError(f"#card({f.cid}) left in a formula handed to the evaluator")
        if isinstance(f, Not):
            return not self._eval(f.body, sets, elems)
        if isinstance(f, And):
            return all(self._eval(p, sets, elems) for p in f.parts)
        if isinstance(f, Or):
            return any(self._eval(p, sets, elems) for p in f.parts)
        if isinstance(f, Implies):
            return (not self._eval(f.left, sets, elems)) or self._eval(f.right, sets, elems)
        if isinstance(f, Iff):
            return self._eval(f.left, sets, elems) == self._eval(f.right, sets, elems)

        free_elems, free_sets = self._free_of(f)
        key = (id(f), tuple(elems[x] for x in free_elems), tuple(sets[X] for X in free_sets))
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        want = f.kind == EXISTS
        result = not want
        if isinstance(f, ElemQuant):
            saved = elems.get(f.var)
            for v in range(self.g.n):
                elems[f.var] = v
                if self._eval(f.body, sets, elems) == want:
                    result = want
                    break
            _restore(elems, f.var, saved)
        else:
            saved = sets.get(f.var)
            for mask in range(self.full + 1):
                sets[f.var] = mask
                if self._eval(f.body, sets, elems) == want:
                    result = want
                    break
            _restore(sets, f.var, saved)
        self._memo[key] = result
        return result


def _restore(env: Dict[str, int], name: str, saved: Optional[int]) -> None:
    if saved is None:
        env.pop(name, None)
    else:
        env[name] = saved


def mc_naive(g: Graph, formula: Union[MSOFormula, Formula],
             assignment: Sequence[Union[int, Iterable[int]]],
             free_vars: Optional[Sequence[str]] = None,
             work_cap: int = DEFAULT_WORK_CAP,
             checker: Optional[ModelChecker] = None) -> bool:
    """Truth of a pure MSO formula under ``assignment`` (sets or bitmasks per free variable).

    Raises:
        ResourceLimit: when the work estimate exceeds ``work_cap``
    """
    if isinstance(formula, MSOFormula):
        body, names = formula.body, formula.free_vars
    else:
        body, names = formula, tuple(free_vars or ())
    if len(assignment) != len(names):
        raise ValidationError(f"Assignment has {len(assignment)} sets for {len(names)} free variables")
    masks = {name: (part if isinstance(part, int) else to_mask(part)) for name, part in zip(names, assignment)}
    checker = checker or ModelChecker(g, work_cap)
    return checker.holds(body, masks)
