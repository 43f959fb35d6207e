"""
Recursive-descent parser for the formula surface syntax.

Grammar, lowest precedence first::

    formula  := ['free' names ':'] iff
    iff      := imp ('<->' imp)*
    imp      := or ['->' imp]
    or       := and ('|' and)*
    and      := unary ('&' unary)*
    unary    := '!' unary | quant names unary | atom
    quant    := exists | forall | setexists | setforall
    atom     := '(' iff ')' | true | false | edge(x, y) | label(L, x)
              | connected(X) | #card(id) | x in X | x = y | x != y

``exists``/``forall`` bind a set variable when the name starts with an
uppercase letter. ``bigand i = 1..k ( ... {i} ... )`` and ``bigor`` are
expanded textually before tokenizing.
"""
import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from .formula import (
    EXISTS, FALSE, FORALL, TRUE, And, Card, Connected, Edge, ElemQuant, Equal, Formula,
    Iff, Implies, Label, Member, MSOFormula, Not, Or, SetQuant, is_set_name,
)
from ..utils.exceptions import ParseError, UnboundVariable, UnknownGlobalConstraint

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><->|->|!=|[()&|!,:=\#])
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>\d+)
""", re.VERBOSE)

QUANTIFIERS = ("exists", "forall", "setexists", "setforall")
KEYWORDS = set(QUANTIFIERS) | {"in", "true", "false", "edge", "label", "connected", "card", "free"}

_BIG = re.compile(r"\b(bigand|bigor)\s+([a-z])\s*=\s*(\d+)\s*\.\.\s*(\d+)\s*\(")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def expand_sugar(text: str) -> str:
    """Expand ``bigand``/``bigor`` blocks, innermost first."""
    while True:
        matches = list(_BIG.finditer(text))
        if not matches:
            return text
        m = matches[-1]
        depth, end = 1, m.end()
        while end < len(text) and depth:
            if text[end] == "(":
                depth += 1
            elif text[end] == ")":
                depth -= 1
            end += 1
        if depth:
            raise ParseError(f"Unbalanced parentheses in {m.group(1)}", position=m.start())
        body = text[m.end():end - 1]
        lo, hi = int(m.group(3)), int(m.group(4))
        joiner = " & " if m.group(1) == "bigand" else " | "
        pieces = [f"({body.replace('{' + m.group(2) + '}', str(k))})" for k in range(lo, hi + 1)]
        if pieces:
            replacement = "(" + joiner.join(pieces) + ")"
        else:
            replacement = "true" if m.group(1) == "bigand" else "false"
        text = text[:m.start()] + replacement + text[end:]


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"Unexpected character '{text[pos]}'", position=pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str) -> ParseError:
        found = self.cur.text or "end of input"
        return ParseError(f"{message}, found '{found}'", position=self.cur.pos)

    def accept(self, text: str) -> bool:
        if self.cur.text == text and self.cur.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.cur.text != text or self.cur.kind == "eof":
            raise self.error(f"Expected '{text}'")
        tok = self.cur
        self.i += 1
        return tok

    def name(self, what: str = "a variable") -> str:
        tok = self.cur
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error(f"Expected {what}")
        self.i += 1
        return tok.text

    def names(self) -> List[str]:
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return out

    # formula := ['free' names ':'] iff
    def formula(self) -> Tuple[Optional[List[str]], Formula]:
        header = None
        if self.cur.text == "free" and self.cur.kind == "name":
            self.i += 1
            header = self.names()
            self.expect(":")
        body = self.iff()
        if self.cur.kind != "eof":
            raise self.error("Unexpected trailing input")
        return header, body

    def iff(self) -> Formula:
        left = self.imp()
        while self.accept("<->"):
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.accept("|"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        if self.cur.kind == "name" and self.cur.text in QUANTIFIERS:
            word = self.cur.text
            self.i += 1
            variables = self.names()
            body = self.unary()
            forced_set = word.startswith("set")
            kind = EXISTS if word.endswith("exists") else FORALL
            for var in reversed(variables):
                if forced_set or is_set_name(var):
                    body = SetQuant(kind, var, body)
                else:
                    body = ElemQuant(kind, var, body)
            return body
        return self.atom()

    def atom(self) -> Formula:
        tok = self.cur
        if self.accept("("):
            inner = self.iff()
            self.expect(")")
            return inner
        if self.accept("#"):
            if not self.accept("card"):
                raise self.error("Expected 'card' after '#'")
            self.expect("(")
            if self.cur.kind not in ("name", "num"):
                raise self.error("Expected a constraint id")
            cid = self.cur.text
            self.i += 1
            self.expect(")")
            return Card(cid)
        if tok.kind != "name":
            raise self.error("Expected a formula")
        if tok.text == "true":
            self.i += 1
            return TRUE
        if tok.text == "false":
            self.i += 1
            return FALSE
        if tok.text in ("edge", "label", "connected"):
            self.i += 1
            self.expect("(")
            if tok.text == "connected":
                arg = self.name()
                self.expect(")")
                return Connected(arg)
            first = self.name("a label" if tok.text == "label" else "a variable")
            self.expect(",")
            second = self.name()
            self.expect(")")
            return Edge(first, second) if tok.text == "edge" else Label(first, second)
        left = self.name()
        if self.accept("in"):
            return Member(left, self.name())
        if self.accept("="):
            return Equal(left, self.name())
        if self.accept("!="):
            return Not(Equal(left, self.name()))
        raise self.error(f"Expected 'in', '=' or '!=' after '{left}'")


def _check_scopes(f: Formula, elems: Set[str], sets: Set[str], free_sets: Set[str],
                  cards: Optional[Iterable[str]], used_free: Set[str]) -> None:
    """Raise on unbound element variables, unknown set variables and undeclared cards."""
    def need_elem(name: str):
        if name not in elems:
            if name in sets:
                raise UnboundVariable(f"'{name}' is a set variable used as an element")
            raise UnboundVariable(f"Element variable '{name}' is not bound")

    def need_set(name: str):
        if name in sets:
            return
        if name in elems:
            raise UnboundVariable(f"'{name}' is an element variable used as a set")
        if name not in free_sets:
            raise UnboundVariable(f"Set variable '{name}' is neither quantified nor declared free")
        used_free.add(name)

    if isinstance(f, Member):
        need_elem(f.elem)
        need_set(f.set_var)
    elif isinstance(f, (Equal, Edge)):
        need_elem(f.left)
        need_elem(f.right)
    elif isinstance(f, Label):
        need_elem(f.elem)
    elif isinstance(f, Connected):
        need_set(f.set_var)
    elif isinstance(f, Card):
        if cards is not None and f.cid not in cards:
            raise UnknownGlobalConstraint(f"#card({f.cid}) names no declared global constraint")
    elif isinstance(f, ElemQuant):
        _check_scopes(f.body, (elems | {f.var}), sets - {f.var}, free_sets, cards, used_free)
    elif isinstance(f, SetQuant):
        _check_scopes(f.body, elems - {f.var}, sets | {f.var}, free_sets, cards, used_free)
    else:
        for child in f.children():
            _check_scopes(child, elems, sets, free_sets, cards, used_free)


def _collect_set_names(f: Formula, bound: Set[str], out: Set[str]) -> None:
    if isinstance(f, (Member, Connected)):
        if f.set_var not in bound:
            out.add(f.set_var)
    elif isinstance(f, SetQuant):
        _collect_set_names(f.body, bound | {f.var}, out)
    elif isinstance(f, ElemQuant):
        _collect_set_names(f.body, bound - {f.var}, out)
    else:
        for child in f.children():
            _collect_set_names(child, bound, out)


def _natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


def _default_free_order(names: Set[str]) -> Tuple[str, ...]:
    """``X1..Xmax`` when every name has that form, otherwise natural order."""
    indexed = [re.fullmatch(r"X(\d+)", name) for name in names]
    if names and all(indexed):
        top = max(int(m.group(1)) for m in indexed)
        if top >= 1 and all(int(m.group(1)) >= 1 for m in indexed):
            return tuple(f"X{k}" for k in range(1, top + 1))
    return tuple(sorted(names, key=_natural_key))


def parse_formula(text: str, declared_globals: Optional[Iterable[str]] = None) -> MSOFormula:
    """Parse formula text.

    Args:
        text: formula in the surface syntax
        declared_globals: ids a ``#card(id)`` may reference; ``None`` skips the check

    Raises:
        ParseError, UnboundVariable, UnknownGlobalConstraint
    """
    tokens = tokenize(expand_sugar(text))
    header, body = _Parser(tokens).formula()
    cards = set(declared_globals) if declared_globals is not None else None

    if header is not None:
        if len(set(header)) != len(header):
            raise ParseError("Duplicate name in 'free' declaration")
        free = tuple(header)
    else:
        names: Set[str] = set()
        _collect_set_names(body, set(), names)
        free = _default_free_order(names)

    used: Set[str] = set()
    _check_scopes(body, set(), set(), set(free), cards, used)
    logger.debug(f"Parsed formula with free variables {free}")
    return MSOFormula(body, free)
