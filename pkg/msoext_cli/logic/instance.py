"""
Solver instances: a graph, a formula, cardinality constraints and weights.

Instance file format (sectioned text, ``%`` starts a comment line)::

    [graph]
    graphs/c4.gr                 (a path relative to the instance, or inline graph lines)
    [formula]
    exists x (x in X1) & #card(r1)
    [globals]
    g r1 linear 1 -1 <= 0
    [locals]
    a 1 * 0..2                   (alpha_1 default)
    a 1 3 1                      (alpha_1 at vertex 3)
    c 1 * 2 0..1 *               (|N(v) & X_1| in 0..1 if v in X_2, else anything)
    [weights]
    w 1 * 1
    [fragment]
    gl-lin
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from .constraints import (
    GlobalConstraint, IntervalSet, LocalConstraint, LocalConstraintMap, parse_global,
)
from .formula import Card, MSOFormula, conjoin, print_formula
from .parser import parse_formula
from ..core.graph import Graph, format_graph, parse_graph, read_graph
from ..utils.exceptions import ParseError, ValidationError
from ..utils.validators import validate_variable_index, validate_vertex

logger = logging.getLogger(__name__)

Assignment = Tuple[FrozenSet[int], ...]

SECTIONS = ("graph", "formula", "globals", "locals", "weights", "fragment")


class Fragment(str, Enum):
    MSO = "mso"
    G = "g"
    L = "l"
    G_LIN = "g-lin"
    L_LIN = "l-lin"
    GL = "gl"
    GL_LIN = "gl-lin"
    FAIR = "fair"

    @classmethod
    def parse(cls, text: str) -> "Fragment":
        key = text.strip().lower().replace("_", "-")
        aliases = {"fairmso": "fair", "mso-gl": "gl", "mso-gl-lin": "gl-lin"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValidationError(f"Unknown fragment '{text}' (known: {', '.join(m.value for m in cls)})")

    @property
    def linear(self) -> bool:
        return self in (Fragment.MSO, Fragment.G_LIN, Fragment.L_LIN, Fragment.GL_LIN, Fragment.FAIR)

    @property
    def allows_globals(self) -> bool:
        return self in (Fragment.G, Fragment.G_LIN, Fragment.GL, Fragment.GL_LIN)

    @property
    def allows_locals(self) -> bool:
        return self in (Fragment.L, Fragment.L_LIN, Fragment.GL, Fragment.GL_LIN, Fragment.FAIR)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    formula: MSOFormula
    global_constraints: Tuple[GlobalConstraint, ...] = ()
    local_constraints: Optional[LocalConstraintMap] = None
    weights: Mapping[Tuple[int, int], int] = field(default_factory=dict)
    fragment: Optional[Fragment] = None

    def __post_init__(self):
        if self.local_constraints is None:
            object.__setattr__(self, "local_constraints",
                               LocalConstraintMap(self.formula.ell, self.graph.n))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def ell(self) -> int:
        return self.formula.ell

    @property
    def has_weights(self) -> bool:
        return any(w != 0 for w in self.weights.values())

    def weight(self, i: int, v: int) -> int:
        return self.weights.get((i, v), 0)

    def assignment_weight(self, assignment: Assignment) -> int:
        return sum(self.weight(i, v) for i, part in enumerate(assignment) for v in part)

    def with_locals(self, lmap: LocalConstraintMap) -> "Instance":
        return replace(self, local_constraints=lmap)


def bind_globals(formula: MSOFormula, globals_: Sequence[GlobalConstraint]) -> MSOFormula:
    """Conjoin ``#card(id)`` for every declared constraint the formula does not reference."""
    unreferenced = [Card(gc.cid) for gc in globals_ if gc.cid not in formula.cards]
    if not unreferenced:
        return formula
    logger.debug(f"Conjoining unreferenced global constraints {[c.cid for c in unreferenced]}")
    return conjoin(formula, unreferenced)


def build_instance(graph: Graph, formula: Union[str, MSOFormula],
                   global_constraints: Sequence[GlobalConstraint] = (),
                   local_constraints: Optional[LocalConstraintMap] = None,
                   weights: Optional[Mapping[Tuple[int, int], int]] = None,
                   fragment: Optional[Fragment] = None) -> Instance:
    """Assemble an instance in code; declared globals bind even when the formula omits them."""
    if isinstance(formula, str):
        formula = parse_formula(formula, declared_globals=[gc.cid for gc in global_constraints])
    formula = bind_globals(formula, global_constraints)
    weights = {key: w for key, w in (weights or {}).items() if w != 0}
    return Instance(graph, formula, tuple(global_constraints), local_constraints, weights, fragment)


def sizes_of(assignment: Assignment) -> Tuple[int, ...]:
    return tuple(len(part) for part in assignment)


def fragment_of(inst: Instance) -> Fragment:
    """The smallest fragment tag consistent with the instance contents."""
    has_globals = bool(inst.global_constraints)
    has_locals = not inst.local_constraints.is_empty
    linear_globals = all(gc.is_linear for gc in inst.global_constraints)
    linear_locals = all(lc.is_interval for _, _, lc in inst.local_constraints.constraints())
    if has_globals and has_locals:
        return Fragment.GL_LIN if linear_globals and linear_locals else Fragment.GL
    if has_globals:
        return Fragment.G_LIN if linear_globals else Fragment.G
    if has_locals:
        return Fragment.L_LIN if linear_locals else Fragment.L
    return Fragment.MSO


def check_fragment(inst: Instance, fragment: Optional[Fragment] = None) -> Fragment:
    """Validate that the contents fit ``fragment`` (default: the instance's own tag)."""
    tag = fragment or inst.fragment
    inferred = fragment_of(inst)
    if tag is None:
        return inferred
    if inst.global_constraints and not tag.allows_globals:
        raise ValidationError(f"Fragment {tag.value} admits no global constraints")
    if not inst.local_constraints.is_empty and not tag.allows_locals:
        raise ValidationError(f"Fragment {tag.value} admits no local constraints")
    if tag.linear:
        if not all(gc.is_linear for gc in inst.global_constraints):
            raise ValidationError(f"Fragment {tag.value} needs linear global constraints")
        if not all(lc.is_interval for _, _, lc in inst.local_constraints.constraints()):
            raise ValidationError(f"Fragment {tag.value} needs single-interval unconditional local constraints")
    if tag == Fragment.FAIR:
        if not all(lc.is_fair for _, _, lc in inst.local_constraints.constraints()):
            raise ValidationError("Fragment fair needs local constraints of the form 0..u")
    return tag


# ----------------------------------------------------------------------------
# Parsing
# ----------------------------------------------------------------------------

def _split_sections(text: str) -> Dict[str, List[Tuple[int, str]]]:
    sections: Dict[str, List[Tuple[int, str]]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("[") and line.endswith("]") and line[1:-1].strip().lower() in SECTIONS:
            current = line[1:-1].strip().lower()
            if current in sections:
                raise ParseError(f"Duplicate section [{current}]", line=lineno)
            sections[current] = []
            continue
        if line.startswith("[") and line.split("]")[0][1:].strip().lower() in SECTIONS:
            # "[graph] path" on one line
            head, _, rest = line.partition("]")
            current = head[1:].strip().lower()
            sections.setdefault(current, [])
            if rest.strip():
                sections[current].append((lineno, rest.strip()))
            continue
        if current is None:
            raise ParseError(f"Line outside any section: '{line}'", line=lineno)
        sections[current].append((lineno, line))
    return sections


def _vertex_arg(token: str, n: int, lineno: int) -> Optional[int]:
    if token == "*":
        return None
    try:
        v = int(token) - 1
        validate_vertex(v, n)
    except (ValueError, ValidationError) as e:
        raise ParseError(f"Bad vertex '{token}': {e}", line=lineno)
    return v


def _variable_arg(token: str, ell: int, lineno: int) -> int:
    try:
        i = int(token)
        validate_variable_index(i, ell)
    except (ValueError, ValidationError) as e:
        raise ParseError(f"Bad variable index '{token}': {e}", line=lineno)
    return i - 1


def _parse_locals(lines: Sequence[Tuple[int, str]], ell: int, n: int) -> LocalConstraintMap:
    defaults: List[Optional[LocalConstraint]] = [None] * ell
    entries: Dict[Tuple[int, int], LocalConstraint] = {}
    for lineno, line in lines:
        parts = line.split()
        try:
            if parts[0] == "a" and len(parts) >= 4:
                lc = LocalConstraint(IntervalSet.parse("".join(parts[3:])))
            elif parts[0] == "c" and len(parts) == 6:
                j = _variable_arg(parts[3], ell, lineno)
                lc = LocalConstraint(IntervalSet.parse(parts[4]), j, IntervalSet.parse(parts[5]))
            else:
                raise ParseError(f"Malformed local constraint '{line}'", line=lineno)
        except ParseError as e:
            if e.line is None:
                raise ParseError(str(e), line=lineno)
            raise
        i = _variable_arg(parts[1], ell, lineno)
        v = _vertex_arg(parts[2], n, lineno)
        if v is None:
            defaults[i] = lc
        else:
            entries[(i, v)] = lc
    return LocalConstraintMap(ell, n, tuple(defaults), entries)


def _parse_weights(lines: Sequence[Tuple[int, str]], ell: int, n: int) -> Dict[Tuple[int, int], int]:
    weights: Dict[Tuple[int, int], int] = {}
    explicit: Dict[Tuple[int, int], int] = {}
    for lineno, line in lines:
        parts = line.split()
        if parts[0] != "w" or len(parts) != 4:
            raise ParseError(f"Malformed weight line '{line}'", line=lineno)
        i = _variable_arg(parts[1], ell, lineno)
        v = _vertex_arg(parts[2], n, lineno)
        try:
            cost = int(parts[3])
        except ValueError:
            raise ParseError(f"Weight must be an integer: '{parts[3]}'", line=lineno)
        if v is None:
            for u in range(n):
                weights[(i, u)] = cost
        else:
            explicit[(i, v)] = cost
    weights.update(explicit)
    return {key: w for key, w in weights.items() if w != 0}


def parse_instance(text: str, base_dir: Optional[Path] = None) -> Instance:
    """Parse an instance file.

    Declared global constraints the formula never references are conjoined
    to it, so every declared constraint binds.
    """
    sections = _split_sections(text)
    for required in ("graph", "formula"):
        if required not in sections:
            raise ParseError(f"Missing [{required}] section")

    graph_lines = sections["graph"]
    if len(graph_lines) == 1 and not graph_lines[0][1].split()[0] in ("p", "e", "l", "c"):
        path = Path(graph_lines[0][1])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            graph = read_graph(path)
        except OSError as e:
            raise ParseError(f"Cannot read graph file {path}: {e}", line=graph_lines[0][0])
    else:
        graph = parse_graph("\n".join(line for _, line in graph_lines))

    global_lines = sections.get("globals", [])
    globals_: List[GlobalConstraint] = []
    for lineno, line in global_lines:
        parts = line.split()
        if parts[0] != "g":
            raise ParseError(f"Malformed global constraint line '{line}'", line=lineno)
        try:
            globals_.append(parse_global(parts[1:]))
        except ParseError as e:
            raise ParseError(str(e), line=lineno)
    ids = [gc.cid for gc in globals_]
    if len(set(ids)) != len(ids):
        raise ParseError("Duplicate global constraint id")

    formula_text = " ".join(line for _, line in sections["formula"])
    formula = bind_globals(parse_formula(formula_text, declared_globals=ids), globals_)
    for gc in globals_:
        if any(i >= formula.ell for i in gc.variables()):
            raise ParseError(f"Global constraint {gc.cid} reads a variable beyond X{formula.ell}")

    lmap = _parse_locals(sections.get("locals", []), formula.ell, graph.n)
    weights = _parse_weights(sections.get("weights", []), formula.ell, graph.n)
    fragment = None
    if sections.get("fragment"):
        fragment = Fragment.parse(sections["fragment"][0][1])

    inst = Instance(graph, formula, tuple(globals_), lmap, weights, fragment)
    if fragment is not None:
        check_fragment(inst)
    return inst


def read_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(), base_dir=path.parent)


def format_instance(inst: Instance, graph_path: Optional[str] = None) -> str:
    lines = ["[graph]"]
    if graph_path is not None:
        lines.append(graph_path)
    else:
        lines.extend(format_graph(inst.graph).splitlines())
    lines += ["[formula]", print_formula(inst.formula)]
    if inst.global_constraints:
        lines.append("[globals]")
        lines.extend(f"g {gc.cid} {gc.describe()}" for gc in inst.global_constraints)
    lmap = inst.local_constraints
    if not lmap.is_empty:
        lines.append("[locals]")
        for i, default in enumerate(lmap.defaults):
            if default is not None:
                lines.append(_format_local(i, "*", default))
        for (i, v), lc in sorted(lmap.entries.items()):
            lines.append(_format_local(i, str(v + 1), lc))
    if inst.weights:
        lines.append("[weights]")
        lines.extend(f"w {i + 1} {v + 1} {w}" for (i, v), w in sorted(inst.weights.items()))
    if inst.fragment is not None:
        lines += ["[fragment]", inst.fragment.value]
    return "\n".join(lines) + "\n"


def _format_local(i: int, where: str, lc: LocalConstraint) -> str:
    if lc.condition is None:
        return f"a {i + 1} {where} {lc.allowed.format()}"
    return f"c {i + 1} {where} {lc.condition + 1} {lc.allowed.format()} {lc.allowed_out.format()}"


def write_instance(inst: Instance, path: Union[str, Path], graph_path: Optional[str] = None) -> None:
    Path(path).write_text(format_instance(inst, graph_path))


# ----------------------------------------------------------------------------
# Results
# ----------------------------------------------------------------------------

class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass
class SolveResult:
    status: Status
    assignment: Optional[Assignment] = None
    weight: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def satisfiable(self) -> bool:
        return self.status == Status.SAT

    @classmethod
    def unsat(cls, **details: Any) -> "SolveResult":
        return cls(Status.UNSAT, details=dict(details))

    @classmethod
    def sat(cls, inst: Instance, assignment: Sequence[Sequence[int]], **details: Any) -> "SolveResult":
        frozen: Assignment = tuple(frozenset(part) for part in assignment)
        return cls(Status.SAT, frozen, inst.assignment_weight(frozen), dict(details))
