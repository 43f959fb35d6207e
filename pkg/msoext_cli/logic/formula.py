"""
MSO_1 abstract syntax.

Nodes are frozen dataclasses, so formulas are hashable and can key memo
tables. Element variables are lowercase names, set variables start with an
uppercase letter.
"""
import itertools
from dataclasses import dataclass, field
from typing import FrozenSet, Iterator, Sequence, Tuple

from .constraints import PreEvaluation


class Formula:
    """Base class of formula nodes."""

    def children(self) -> Tuple["Formula", ...]:
        return ()


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Member(Formula):
    elem: str
    set_var: str


@dataclass(frozen=True)
class Equal(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Edge(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Label(Formula):
    label: str
    elem: str


@dataclass(frozen=True)
class Card(Formula):
    """Reference to a declared global constraint."""

    cid: str


@dataclass(frozen=True)
class Connected(Formula):
    """``G[X]`` is connected; the empty set counts as connected."""

    set_var: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class And(Formula):
    parts: Tuple[Formula, ...]

    def children(self):
        return self.parts


@dataclass(frozen=True)
class Or(Formula):
    parts: Tuple[Formula, ...]

    def children(self):
        return self.parts


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


EXISTS = "exists"
FORALL = "forall"


@dataclass(frozen=True)
class ElemQuant(Formula):
    kind: str
    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class SetQuant(Formula):
    kind: str
    var: str
    body: Formula

    def children(self):
        return (self.body,)


TRUE = Const(True)
FALSE = Const(False)


def is_set_name(name: str) -> bool:
    return name[:1].isupper()


def conj(*parts: Formula) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disj(*parts: Formula) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


# ----------------------------------------------------------------------------
# Structural queries
# ----------------------------------------------------------------------------

def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def free_variables(f: Formula) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Free element variables and free set variables of ``f``."""
    if isinstance(f, Member):
        return frozenset({f.elem}), frozenset({f.set_var})
    if isinstance(f, (Equal, Edge)):
        return frozenset({f.left, f.right}), frozenset()
    if isinstance(f, Label):
        return frozenset({f.elem}), frozenset()
    if isinstance(f, Connected):
        return frozenset(), frozenset({f.set_var})
    if isinstance(f, ElemQuant):
        elems, sets = free_variables(f.body)
        return elems - {f.var}, sets
    if isinstance(f, SetQuant):
        elems, sets = free_variables(f.body)
        return elems, sets - {f.var}
    elems, sets = frozenset(), frozenset()
    for child in f.children():
        ce, cs = free_variables(child)
        elems, sets = elems | ce, sets | cs
    return elems, sets


def card_ids(f: Formula) -> FrozenSet[str]:
    return frozenset(node.cid for node in walk(f) if isinstance(node, Card))


def label_names(f: Formula) -> FrozenSet[str]:
    return frozenset(node.label for node in walk(f) if isinstance(node, Label))


# set quantifiers and element quantifiers in the expansion of connected(X)
CONNECTED_COST = (1, 5)


def quantifier_counts(f: Formula) -> Tuple[int, int, int]:
    """``(q_S, q_e, t)`` with ``t = 2**q_S * q_e``; ``connected`` counts as its expansion."""
    q_s = q_e = 0
    for node in walk(f):
        if isinstance(node, SetQuant):
            q_s += 1
        elif isinstance(node, ElemQuant):
            q_e += 1
        elif isinstance(node, Connected):
            q_s += CONNECTED_COST[0]
            q_e += CONNECTED_COST[1]
    return q_s, q_e, (2 ** q_s) * q_e


# ----------------------------------------------------------------------------
# Rewriting
# ----------------------------------------------------------------------------

def _fresh(base: str, taken: set) -> str:
    for k in itertools.count():
        name = f"{base}_{k}"
        if name not in taken:
            taken.add(name)
            return name
    raise AssertionError("unreachable")


def connected_definition(set_var: str, taken: set) -> Formula:
    """Plain MSO definition of ``connected(X)``.

    Every nonempty proper part Y of X has an edge leaving it inside X.
    """
    Y = _fresh("Y", taken)
    x, y, z, u, v = (_fresh(b, taken) for b in ("x", "y", "z", "u", "v"))
    subset = ElemQuant(FORALL, x, Implies(Member(x, Y), Member(x, set_var)))
    nonempty = ElemQuant(EXISTS, y, Member(y, Y))
    proper = ElemQuant(EXISTS, z, And((Member(z, set_var), Not(Member(z, Y)))))
    leaving = ElemQuant(EXISTS, u, ElemQuant(EXISTS, v, And((
        Member(u, Y), Member(v, set_var), Not(Member(v, Y)), Edge(u, v)))))
    return SetQuant(FORALL, Y, Implies(And((subset, nonempty, proper)), leaving))


def map_formula(f: Formula, fn) -> Formula:
    """Bottom-up rebuild; ``fn`` sees each node after its children are rebuilt."""
    if isinstance(f, Not):
        return fn(Not(map_formula(f.body, fn)))
    if isinstance(f, And):
        return fn(And(tuple(map_formula(p, fn) for p in f.parts)))
    if isinstance(f, Or):
        return fn(Or(tuple(map_formula(p, fn) for p in f.parts)))
    if isinstance(f, Implies):
        return fn(Implies(map_formula(f.left, fn), map_formula(f.right, fn)))
    if isinstance(f, Iff):
        return fn(Iff(map_formula(f.left, fn), map_formula(f.right, fn)))
    if isinstance(f, ElemQuant):
        return fn(ElemQuant(f.kind, f.var, map_formula(f.body, fn)))
    if isinstance(f, SetQuant):
        return fn(SetQuant(f.kind, f.var, map_formula(f.body, fn)))
    return fn(f)


def variable_names(f: Formula) -> set:
    names = set()
    for node in walk(f):
        for attr in ("elem", "set_var", "left", "right", "var"):
            value = getattr(node, attr, None)
            if isinstance(value, str):
                names.add(value)
    return names


def expand_connected(f: Formula) -> Formula:
    taken = variable_names(f)
    return map_formula(f, lambda node: connected_definition(node.set_var, taken)
                       if isinstance(node, Connected) else node)


def simplify(f: Formula) -> Formula:
    """Constant folding. Element quantifiers over constants are kept (the domain may be empty)."""
    def fold(node: Formula) -> Formula:
        if isinstance(node, Not) and isinstance(node.body, Const):
            return Const(not node.body.value)
        if isinstance(node, Not) and isinstance(node.body, Not):
            return node.body.body
        if isinstance(node, And):
            if any(p == FALSE for p in node.parts):
                return FALSE
            return conj(*(p for p in node.parts if p != TRUE))
        if isinstance(node, Or):
            if any(p == TRUE for p in node.parts):
                return TRUE
            return disj(*(p for p in node.parts if p != FALSE))
        if isinstance(node, Implies):
            if node.left == FALSE or node.right == TRUE:
                return TRUE
            if node.left == TRUE:
                return node.right
            if node.right == FALSE:
                return fold(Not(node.left))
        if isinstance(node, Iff):
            if isinstance(node.left, Const) and isinstance(node.right, Const):
                return Const(node.left.value == node.right.value)
            for a, b in ((node.left, node.right), (node.right, node.left)):
                if a == TRUE:
                    return b
                if a == FALSE:
                    return fold(Not(b))
        if isinstance(node, SetQuant) and isinstance(node.body, Const):
            return node.body
        return node
    return map_formula(f, fold)


def substitute_cards(f: Formula, beta: PreEvaluation) -> Formula:
    """``beta(f)``: every ``#card(id)`` replaced by its guessed value, then folded."""
    replaced = map_formula(f, lambda node: Const(beta[node.cid]) if isinstance(node, Card) else node)
    return simplify(replaced)


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form over And/Or; negations end up on atoms."""
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, And):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Implies):
        return nnf(Or((Not(f.left), f.right)), negate)
    if isinstance(f, Iff):
        both = And((f.left, f.right))
        neither = And((Not(f.left), Not(f.right)))
        return nnf(Or((both, neither)), negate)
    if isinstance(f, (ElemQuant, SetQuant)):
        kind = f.kind
        if negate:
            kind = FORALL if kind == EXISTS else EXISTS
        return type(f)(kind, f.var, nnf(f.body, negate))
    return Not(f) if negate else f


def flatten(f: Formula) -> Formula:
    """Merge directly nested And/Or nodes of the same kind."""
    def merge(node: Formula) -> Formula:
        if isinstance(node, (And, Or)):
            parts = []
            for p in node.parts:
                if type(p) is type(node):
                    parts.extend(p.parts)
                else:
                    parts.append(p)
            return type(node)(tuple(parts))
        return node
    return map_formula(f, merge)


# ----------------------------------------------------------------------------
# Printing
# ----------------------------------------------------------------------------

def format_node(f: Formula) -> str:
    """Fully parenthesized text of ``f``."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Member):
        return f"{f.elem} in {f.set_var}"
    if isinstance(f, Equal):
        return f"{f.left} = {f.right}"
    if isinstance(f, Edge):
        return f"edge({f.left}, {f.right})"
    if isinstance(f, Label):
        return f"label({f.label}, {f.elem})"
    if isinstance(f, Card):
        return f"#card({f.cid})"
    if isinstance(f, Connected):
        return f"connected({f.set_var})"
    if isinstance(f, Not):
        return f"!({format_node(f.body)})"
    if isinstance(f, And):
        return " & ".join(f"({format_node(p)})" for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(f"({format_node(p)})" for p in f.parts)
    if isinstance(f, Implies):
        return f"({format_node(f.left)}) -> ({format_node(f.right)})"
    if isinstance(f, Iff):
        return f"({format_node(f.left)}) <-> ({format_node(f.right)})"
    if isinstance(f, ElemQuant):
        return f"{f.kind} {f.var} ({format_node(f.body)})"
    if isinstance(f, SetQuant):
        return f"set{f.kind} {f.var} ({format_node(f.body)})"
    raise TypeError(f"Unknown formula node {f!r}")


# ----------------------------------------------------------------------------
# Formulas with free variables
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MSOFormula:
    """A formula together with the ordered free set variables X_1..X_l."""

    body: Formula
    free_vars: Tuple[str, ...] = ()
    cards: FrozenSet[str] = field(default=frozenset())

    def __post_init__(self):
        if not self.cards:
            object.__setattr__(self, "cards", card_ids(self.body))

    @property
    def ell(self) -> int:
        return len(self.free_vars)

    def counts(self) -> Tuple[int, int, int]:
        return quantifier_counts(self.body)

    def index(self, name: str) -> int:
        return self.free_vars.index(name)

    def with_body(self, body: Formula) -> "MSOFormula":
        return MSOFormula(body, self.free_vars, card_ids(body))


def print_formula(f: MSOFormula) -> str:
    text = format_node(f.body)
    if f.free_vars:
        return f"free {', '.join(f.free_vars)} : {text}"
    return text


def pre_evaluations(f: MSOFormula) -> Iterator[Tuple[PreEvaluation, Formula]]:
    """All ``2**c`` pre-evaluations over the referenced global constraints.

    Yields ``(beta, beta(f))``; the residue is constant folded, so refuted
    guesses show up as ``Const(False)``.
    """
    ids = sorted(f.cards)
    for values in itertools.product((True, False), repeat=len(ids)):
        beta = PreEvaluation(tuple(zip(ids, values)))
        yield beta, substitute_cards(f.body, beta)


def residues(f: MSOFormula) -> Iterator[Tuple[PreEvaluation, Formula]]:
    """Pre-evaluations whose residue is not identically false."""
    for beta, body in pre_evaluations(f):
        if body != FALSE:
            yield beta, body


def conjoin(f: MSOFormula, extra: Sequence[Formula]) -> MSOFormula:
    if not extra:
        return f
    body = f.body
    parts = list(body.parts) if isinstance(body, And) else ([] if body == TRUE else [body])
    return f.with_body(conj(*parts, *extra))
