"""
Tree automata for a library of MSO predicates over nice tree decompositions.

A residual formula is split into conjuncts; each conjunct must match one of
the predicate templates below (up to renaming of bound element variables,
ordering of conjunctions and disjunctions, and negation normal form). The
matched predicates become components of a product automaton that runs
bottom-up over the nice decomposition:

* ``introduce(state, v, nbrs, member)`` sees the membership bits of ``v``
  and of its neighbours in the child's bag;
* ``forget(state, v)`` and ``join(left, right)`` see states only.

A transition returning ``None`` rejects.
"""
import itertools
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from ..core.graph import Graph
from ..core.treedecomp import NiceTreeDecomposition, NodeKind
from ..logic.formula import (
    FORALL, And, Const, Edge, ElemQuant, Equal, Formula, Label, Member, Not, Or, SetQuant,
    flatten, format_node, free_variables, label_names, nnf, simplify,
)
from ..logic.parser import parse_formula
from ..utils.exceptions import UnsupportedPredicate

logger = logging.getLogger("msoext_cli.tw.automaton")

State = Optional[Hashable]
Bits = Mapping[int, int]

TEMPLATES: Dict[str, Tuple[int, str]] = {
    "independent": (1, "forall x, y ((x in {0} & y in {0}) -> !edge(x, y))"),
    "vertex_cover": (1, "forall x, y (edge(x, y) -> (x in {0} | y in {0}))"),
    "dominating": (1, "forall x (x in {0} | exists y (y in {0} & edge(x, y)))"),
    "nonempty": (1, "exists x (x in {0})"),
    "empty": (1, "forall x !(x in {0})"),
    "connected": (1, "connected({0})"),
    "subset": (2, "forall x (x in {0} -> x in {1})"),
    "disjoint": (2, "forall x !(x in {0} & x in {1})"),
    "equal": (2, "forall x (x in {0} <-> x in {1})"),
}

LABEL_TEMPLATES: Dict[str, str] = {
    "label_subset": "forall x (x in {0} -> label({label}, x))",
    "label_superset": "forall x (label({label}, x) -> x in {0})",
}


@dataclass(frozen=True)
class PredicateSpec:
    """One recognized conjunct: predicate name, free-variable indices, optional label."""

    name: str
    sets: Tuple[int, ...] = ()
    label: Optional[str] = None

    def __str__(self):
        args = [f"X{i + 1}" for i in self.sets] + ([self.label] if self.label else [])
        return f"{self.name}({', '.join(args)})"


# ----------------------------------------------------------------------------
# Recognition
# ----------------------------------------------------------------------------

def _canon(f: Formula, depth: int = 0, names: Optional[Dict[str, str]] = None) -> Formula:
    names = names or {}
    if isinstance(f, ElemQuant):
        inner = dict(names)
        inner[f.var] = f"_e{depth}"
        return ElemQuant(f.kind, inner[f.var], _canon(f.body, depth + 1, inner))
    if isinstance(f, SetQuant):
        return SetQuant(f.kind, f.var, _canon(f.body, depth, names))
    if isinstance(f, (And, Or)):
        parts = sorted((_canon(p, depth, names) for p in f.parts), key=format_node)
        return type(f)(tuple(parts))
    if isinstance(f, Not):
        return Not(_canon(f.body, depth, names))
    if isinstance(f, Member):
        return Member(names.get(f.elem, f.elem), f.set_var)
    if isinstance(f, (Edge, Equal)):
        left, right = sorted((names.get(f.left, f.left), names.get(f.right, f.right)))
        return type(f)(left, right)
    if isinstance(f, Label):
        return Label(f.label, names.get(f.elem, f.elem))
    return f


def normalize(f: Formula) -> Formula:
    """Canonical form used for template matching."""
    return _canon(flatten(nnf(simplify(f))))


def split_conjuncts(f: Formula) -> List[Formula]:
    """Top-level conjuncts, distributing universal element quantifiers over conjunctions."""
    if isinstance(f, And):
        return [c for p in f.parts for c in split_conjuncts(p)]
    if isinstance(f, ElemQuant) and f.kind == FORALL:
        inner = split_conjuncts(f.body)
        if len(inner) > 1:
            return [ElemQuant(FORALL, f.var, c) for c in inner]
    return [f]


@lru_cache(maxsize=None)
def _template(text: str) -> Formula:
    return normalize(parse_formula(text).body)


def _covers_text(names: Sequence[str]) -> str:
    return "forall x (" + " | ".join(f"x in {name}" for name in names) + ")"


def _match(conjunct: Formula, free_vars: Sequence[str]) -> Optional[PredicateSpec]:
    if conjunct == Const(True):
        return PredicateSpec("true")
    if conjunct == Const(False):
        return PredicateSpec("false")
    elems, sets = free_variables(conjunct)
    if elems or any(s not in free_vars for s in sets):
        return None
    target = normalize(conjunct)
    names = sorted(sets)
    index = {name: free_vars.index(name) for name in names}

    for pred, (arity, text) in TEMPLATES.items():
        if arity != len(names):
            continue
        for order in itertools.permutations(names):
            if _template(text.format(*order)) == target:
                return PredicateSpec(pred, tuple(index[s] for s in order))
    if len(names) == 1:
        for label in sorted(label_names(conjunct)):
            for pred, text in LABEL_TEMPLATES.items():
                if _template(text.format(names[0], label=label)) == target:
                    return PredicateSpec(pred, (index[names[0]],), label)
    if names and _template(_covers_text(names)) == target:
        return PredicateSpec("covers", tuple(index[s] for s in names))
    return None


def recognize_predicates(body: Formula, free_vars: Sequence[str]) -> List[PredicateSpec]:
    """Decompose a card-free formula into library predicates.

    Raises:
        UnsupportedPredicate: naming the first conjunct outside the library
    """
    specs: List[PredicateSpec] = []
    for conjunct in split_conjuncts(flatten(nnf(simplify(body)))):
        spec = _match(conjunct, list(free_vars))
        if spec is None:
            raise UnsupportedPredicate(f"No automaton for '{format_node(conjunct)}'; "
                                       f"use the bruteforce backend")
        if spec.name != "true":
            specs.append(spec)
    logger.debug(f"Recognized predicates {[str(s) for s in specs]}")
    return specs


# ----------------------------------------------------------------------------
# Components
# ----------------------------------------------------------------------------

def _bit(member: Bits, v: int, i: int) -> bool:
    return bool(member[v] >> i & 1)


class Component(ABC):
    """One conjunct of the product automaton. States are hashable; ``None`` rejects."""

    def __init__(self, spec: PredicateSpec, g: Graph):
        self.spec = spec
        self.g = g

    @property
    def indices(self) -> Tuple[int, ...]:
        return self.spec.sets

    def leaf(self) -> State:
        return ()

    @abstractmethod
    def introduce(self, state: Hashable, v: int, nbrs: Sequence[int], member: Bits) -> State:
        ...

    def forget(self, state: Hashable, v: int) -> State:
        return state

    def join(self, left: Hashable, right: Hashable) -> State:
        return left

    def accepts(self, state: Hashable) -> bool:
        return True


class VertexCheck(Component):
    """Predicates that only look at one vertex's membership bits."""

    def holds(self, v: int, bits: int) -> bool:
        name, s = self.spec.name, self.spec.sets
        inside = [bool(bits >> i & 1) for i in s]
        if name == "empty":
            return not inside[0]
        if name == "subset":
            return not inside[0] or inside[1]
        if name == "disjoint":
            return not (inside[0] and inside[1])
        if name == "equal":
            return inside[0] == inside[1]
        if name == "covers":
            return any(inside)
        labelled = v in self.g.vertex_labels.get(self.spec.label, frozenset())
        if name == "label_subset":
            return not inside[0] or labelled
        if name == "label_superset":
            return inside[0] or not labelled
        raise UnsupportedPredicate(f"Unknown vertex predicate {name}")

    def introduce(self, state, v, nbrs, member):
        return state if self.holds(v, member[v]) else None


class EdgeCheck(Component):
    """Predicates on the two endpoints of every edge; checked when the later endpoint is introduced."""

    def introduce(self, state, v, nbrs, member):
        i = self.indices[0]
        for u in nbrs:
            a, b = _bit(member, u, i), _bit(member, v, i)
            if self.spec.name == "independent" and a and b:
                return None
            if self.spec.name == "vertex_cover" and not (a or b):
                return None
        return state


class Nonempty(Component):
    def leaf(self):
        return False

    def introduce(self, state, v, nbrs, member):
        return state or _bit(member, v, self.indices[0])

    def join(self, left, right):
        return left or right

    def accepts(self, state):
        return bool(state)


class Dominating(Component):
    """State: the bag vertices already selected or adjacent to a selected vertex."""

    def leaf(self):
        return frozenset()

    def introduce(self, state, v, nbrs, member):
        i = self.indices[0]
        covered = set(state)
        if _bit(member, v, i):
            covered.add(v)
            covered.update(nbrs)
        elif any(_bit(member, u, i) for u in nbrs):
            covered.add(v)
        return frozenset(covered)

    def forget(self, state, v):
        return state - {v} if v in state else None

    def join(self, left, right):
        return left | right


class Connectivity(Component):
    """State: blocks of selected bag vertices joined inside the subtree, and a closed flag.

    ``closed`` records that a whole component has been forgotten; after that
    no further selected vertex may appear.
    """

    def leaf(self):
        return (frozenset(), False)

    def introduce(self, state, v, nbrs, member):
        blocks, closed = state
        i = self.indices[0]
        if not _bit(member, v, i):
            return state
        if closed:
            return None
        touched = {u for u in nbrs if _bit(member, u, i)}
        merged = {v}
        rest = []
        for block in blocks:
            if block & touched:
                merged |= block
            else:
                rest.append(block)
        return (frozenset(rest) | {frozenset(merged)}, False)

    def forget(self, state, v):
        blocks, closed = state
        block = next((b for b in blocks if v in b), None)
        if block is None:
            return state
        if block == {v}:
            if len(blocks) > 1:
                return None
            return (frozenset(), True)
        return ((blocks - {block}) | {block - {v}}, closed)

    def join(self, left, right):
        (lb, lc), (rb, rc) = left, right
        if lc and rc:
            return None
        closed = lc or rc
        if closed and (lb or rb):
            return None
        parent: Dict[int, int] = {}

        def find(x: int) -> int:
            while parent.setdefault(x, x) != x:
                x = parent[x]
            return x

        for block in itertools.chain(lb, rb):
            first = min(block)
            for x in block:
                parent[find(x)] = find(first)
        groups: Dict[int, set] = {}
        for x in list(parent):
            groups.setdefault(find(x), set()).add(x)
        return (frozenset(frozenset(s) for s in groups.values()), closed)


class Reject(Component):
    def leaf(self):
        return None

    def introduce(self, state, v, nbrs, member):
        return None


_COMPONENTS = {
    "independent": EdgeCheck, "vertex_cover": EdgeCheck, "dominating": Dominating,
    "nonempty": Nonempty, "connected": Connectivity, "false": Reject,
}


def make_component(spec: PredicateSpec, g: Graph) -> Component:
    return _COMPONENTS.get(spec.name, VertexCheck)(spec, g)


# ----------------------------------------------------------------------------
# Product automaton
# ----------------------------------------------------------------------------

class TreeAutomaton:
    """Deterministic product of the component automata; states are tuples of component states."""

    def __init__(self, components: Sequence[Component]):
        self.components = list(components)

    @property
    def indices(self) -> Tuple[int, ...]:
        """Free-variable indices whose membership bits the automaton reads."""
        return tuple(sorted({i for c in self.components for i in c.indices}))

    @property
    def is_trivial(self) -> bool:
        return not self.components

    @staticmethod
    def _combine(states) -> State:
        states = tuple(states)
        return None if any(s is None for s in states) else states

    def leaf(self) -> State:
        return self._combine(c.leaf() for c in self.components)

    def introduce(self, state: Hashable, v: int, nbrs: Sequence[int], member: Bits) -> State:
        return self._combine(c.introduce(s, v, nbrs, member) for c, s in zip(self.components, state))

    def forget(self, state: Hashable, v: int) -> State:
        return self._combine(c.forget(s, v) for c, s in zip(self.components, state))

    def join(self, left: Hashable, right: Hashable) -> State:
        return self._combine(c.join(a, b) for c, a, b in zip(self.components, left, right))

    def accepts(self, state: Hashable) -> bool:
        return all(c.accepts(s) for c, s in zip(self.components, state))

    def run(self, ntd: NiceTreeDecomposition, g: Graph, masks: Sequence[int]) -> bool:
        """Evaluate on one assignment, given as one vertex bitmask per free variable."""
        states: Dict[int, State] = {}
        for a in ntd.postorder():
            kind = ntd.kinds[a]
            ch = ntd.children(a)
            if kind == NodeKind.LEAF:
                s = self.leaf()
            elif kind == NodeKind.JOIN:
                left, right = states[ch[0]], states[ch[1]]
                s = None if left is None or right is None else self.join(left, right)
            else:
                child = states[ch[0]]
                v = ntd.vertex[a]
                if child is None:
                    s = None
                elif kind == NodeKind.INTRODUCE:
                    nbrs = sorted(g.neighbor_set(v) & ntd.bags[ch[0]])
                    member = {u: sum((masks[i] >> u & 1) << i for i in range(len(masks)))
                              for u in [v] + nbrs}
                    s = self.introduce(child, v, nbrs, member)
                else:
                    s = self.forget(child, v)
            states[a] = s
        final = states[ntd.root]
        return final is not None and self.accepts(final)


def compile_predicate_automaton(specs: Sequence[PredicateSpec], g: Graph) -> TreeAutomaton:
    return TreeAutomaton([make_component(spec, g) for spec in specs])


def compile_formula(body: Formula, free_vars: Sequence[str], g: Graph) -> TreeAutomaton:
    """Recognize ``body`` and build its product automaton.

    Raises:
        UnsupportedPredicate: when a conjunct is outside the predicate library
    """
    return compile_predicate_automaton(recognize_predicates(body, free_vars), g)
