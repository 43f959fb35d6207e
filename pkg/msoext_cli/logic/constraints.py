"""
Global and local cardinality constraints.

Global constraints are relations over the sizes ``(|X_1|, ..., |X_l|)`` of the
free set variables; local constraints restrict ``|N(v) & X_i|`` per vertex.
Variable indices are 0-based here and 1-based in files.
"""
import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from ..utils.exceptions import OracleFailure, ParseError, ValidationError

logger = logging.getLogger(__name__)

Interval = Tuple[int, Optional[int]]


@dataclass(frozen=True)
class IntervalSet:
    """A sorted union of disjoint integer intervals over the naturals.

    An upper end of ``None`` means unbounded.
    """

    intervals: Tuple[Interval, ...] = ()

    @classmethod
    def of(cls, *pairs: Interval) -> "IntervalSet":
        cleaned = []
        for lo, hi in pairs:
            lo = max(0, lo)
            if hi is not None and hi < lo:
                continue
            cleaned.append((lo, hi))
        cleaned.sort(key=lambda p: p[0])
        merged: List[List[Optional[int]]] = []
        for lo, hi in cleaned:
            if merged and (merged[-1][1] is None or lo <= merged[-1][1] + 1):
                last = merged[-1]
                if last[1] is not None:
                    last[1] = None if hi is None else max(last[1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    @classmethod
    def point(cls, value: int) -> "IntervalSet":
        return cls.of((value, value))

    @classmethod
    def range(cls, lo: int, hi: Optional[int]) -> "IntervalSet":
        return cls.of((lo, hi))

    @classmethod
    def full(cls) -> "IntervalSet":
        return cls(((0, None),))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "IntervalSet":
        return cls.of(*((v, v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "IntervalSet":
        """Parse ``0..3,5,7..*``; ``{}`` is the empty set and ``*`` all naturals."""
        text = text.strip()
        if text in ("{}", "∅"):
            return cls.empty()
        if text == "*":
            return cls.full()
        pairs = []
        for piece in text.split(","):
            piece = piece.strip()
            m = re.fullmatch(r"(\d+)\.\.(\d+|\*)", piece)
            if m:
                hi = None if m.group(2) == "*" else int(m.group(2))
                pairs.append((int(m.group(1)), hi))
            elif re.fullmatch(r"\d+", piece):
                pairs.append((int(piece), int(piece)))
            else:
                raise ParseError(f"Bad interval list '{text}'")
        return cls.of(*pairs)

    def format(self) -> str:
        if not self.intervals:
            return "{}"
        parts = []
        for lo, hi in self.intervals:
            if hi is None:
                parts.append(f"{lo}..*")
            elif lo == hi:
                parts.append(str(lo))
            else:
                parts.append(f"{lo}..{hi}")
        return ",".join(parts)

    def __contains__(self, value: int) -> bool:
        for lo, hi in self.intervals:
            if value < lo:
                return False
            if hi is None or value <= hi:
                return True
        return False

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_interval(self) -> bool:
        return len(self.intervals) <= 1

    @property
    def min(self) -> Optional[int]:
        return self.intervals[0][0] if self.intervals else None

    @property
    def max(self) -> Optional[int]:
        """Largest element; ``None`` when empty or unbounded."""
        return self.intervals[-1][1] if self.intervals else None

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo = max(lo1, lo2)
                if hi1 is None:
                    hi = hi2
                elif hi2 is None:
                    hi = hi1
                else:
                    hi = min(hi1, hi2)
                if hi is None or lo <= hi:
                    out.append((lo, hi))
        return IntervalSet.of(*out)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.of(*self.intervals, *other.intervals)

    def clip(self, lo: int, hi: int) -> "IntervalSet":
        return self.intersect(IntervalSet.range(lo, hi))

    def covers(self, lo: int, hi: int) -> bool:
        """Whether every integer of ``[lo, hi]`` is a member."""
        return self.clip(lo, hi) == IntervalSet.range(lo, hi)

    def meets(self, lo: int, hi: int) -> bool:
        return not self.clip(lo, hi).is_empty

    def values(self, upper: int) -> Iterator[int]:
        """Members up to ``upper`` inclusive."""
        for lo, hi in self.intervals:
            top = upper if hi is None else min(hi, upper)
            yield from range(lo, top + 1)

    def __str__(self):
        return self.format()


# ----------------------------------------------------------------------------
# Global constraints
# ----------------------------------------------------------------------------

SENSES = ("<=", "=", ">=")


class GlobalConstraint(ABC):
    """A relation over the sizes of the free set variables."""

    cid: str

    @abstractmethod
    def holds(self, sizes: Sequence[int]) -> bool:
        ...

    @abstractmethod
    def describe(self) -> str:
        """Body of the ``g <id> ...`` instance-file line."""

    @property
    def is_linear(self) -> bool:
        return False

    def variables(self) -> Tuple[int, ...]:
        """Indices of the size components the relation reads."""
        return ()


def _fraction_text(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class LinearConstraint(GlobalConstraint):
    """``sum_i coeffs[i] * |X_i|  sense  bound`` in exact arithmetic."""

    cid: str
    coeffs: Tuple[Fraction, ...]
    sense: str
    bound: Fraction

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValidationError(f"Unknown sense '{self.sense}' in constraint {self.cid}")

    @property
    def is_linear(self) -> bool:
        return True

    def lhs(self, sizes: Sequence[int]) -> Fraction:
        if len(sizes) < len(self.coeffs):
            raise OracleFailure(f"Constraint {self.cid} needs {len(self.coeffs)} sizes, got {len(sizes)}")
        return sum((a * s for a, s in zip(self.coeffs, sizes)), Fraction(0))

    def holds(self, sizes: Sequence[int]) -> bool:
        value = self.lhs(sizes)
        if self.sense == "<=":
            return value <= self.bound
        if self.sense == ">=":
            return value >= self.bound
        return value == self.bound

    def variables(self) -> Tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.coeffs) if a != 0)

    def describe(self) -> str:
        coeffs = " ".join(_fraction_text(a) for a in self.coeffs)
        return f"linear {coeffs} {self.sense} {_fraction_text(self.bound)}"


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    d = 2
    while d * d <= k:
        if k % d == 0:
            return False
        d += 1
    return True


# name -> (minimum argument count, evaluator over (sizes, args))
ORACLES: Dict[str, Tuple[int, Callable[[Sequence[int], Sequence[int]], bool]]] = {
    "geq_square": (2, lambda s, a: s[a[0]] >= s[a[1]] ** 2),
    "leq_product": (3, lambda s, a: s[a[0]] <= s[a[1]] * s[a[2]]),
    "prime": (1, lambda s, a: _is_prime(s[a[0]])),
    "member": (1, lambda s, a: s[a[0]] in a[1:]),
}


@dataclass(frozen=True)
class OracleConstraint(GlobalConstraint):
    """A named built-in relation.

    ``args`` holds 0-based variable indices, followed by literal values for
    ``member``.
    """

    cid: str
    name: str
    args: Tuple[int, ...]

    def __post_init__(self):
        if self.name not in ORACLES:
            raise ValidationError(f"Unknown oracle '{self.name}' (known: {', '.join(sorted(ORACLES))})")
        if len(self.args) < ORACLES[self.name][0]:
            raise ValidationError(f"Oracle '{self.name}' needs {ORACLES[self.name][0]} arguments")

    def holds(self, sizes: Sequence[int]) -> bool:
        _, fn = ORACLES[self.name]
        return bool(fn(sizes, self.args))

    def variables(self) -> Tuple[int, ...]:
        arity = ORACLES[self.name][0]
        return self.args[:arity]

    def describe(self) -> str:
        arity = ORACLES[self.name][0]
        shown = [str(a + 1) for a in self.args[:arity]] + [str(a) for a in self.args[arity:]]
        return f"oracle {self.name} {' '.join(shown)}"


@dataclass(frozen=True)
class TableConstraint(GlobalConstraint):
    """An explicit list of accepted size tuples."""

    cid: str
    tuples: FrozenSet[Tuple[int, ...]]

    def holds(self, sizes: Sequence[int]) -> bool:
        if not self.tuples:
            return False
        arity = len(next(iter(self.tuples)))
        if len(sizes) < arity:
            raise OracleFailure(f"Table {self.cid} has arity {arity}, got {len(sizes)} sizes")
        return tuple(sizes[:arity]) in self.tuples

    def variables(self) -> Tuple[int, ...]:
        if not self.tuples:
            return ()
        return tuple(range(len(next(iter(self.tuples)))))

    def describe(self) -> str:
        rows = " ".join("(" + ",".join(str(x) for x in t) + ")" for t in sorted(self.tuples))
        return f"table {rows}".rstrip()


@dataclass(frozen=True)
class ModCountConstraint(GlobalConstraint):
    """Counting predicate ``|X_var| = p mod q``."""

    cid: str
    p: int
    q: int
    var: int = 0

    def __post_init__(self):
        if self.q < 1:
            raise ValidationError(f"Modulus of {self.cid} must be positive")

    def holds(self, sizes: Sequence[int]) -> bool:
        return sizes[self.var] % self.q == self.p % self.q

    def variables(self) -> Tuple[int, ...]:
        return (self.var,)

    def describe(self) -> str:
        return f"mod {self.p} {self.q} {self.var + 1}"


def eval_global(gc: GlobalConstraint, sizes: Sequence[int]) -> bool:
    """Membership verdict of ``sizes`` in the relation of ``gc``."""
    try:
        return gc.holds(sizes)
    except OracleFailure:
        raise
    except (IndexError, ValueError, TypeError, ArithmeticError) as e:
        raise OracleFailure(f"Global constraint {gc.cid} failed on {tuple(sizes)}: {e}") from e


def parse_global(tokens: Sequence[str], ell: Optional[int] = None) -> GlobalConstraint:
    """Parse the tokens after ``g`` on a ``[globals]`` line."""
    if len(tokens) < 2:
        raise ParseError("Global constraint needs an id and a form")
    cid, form, rest = tokens[0], tokens[1], list(tokens[2:])
    try:
        if form == "linear":
            if len(rest) < 3:
                raise ParseError(f"Linear constraint {cid} needs coefficients, a sense and a bound")
            coeffs = tuple(Fraction(x) for x in rest[:-2])
            if ell is not None and len(coeffs) != ell:
                raise ParseError(f"Linear constraint {cid} has {len(coeffs)} coefficients for {ell} variables")
            return LinearConstraint(cid, coeffs, rest[-2], Fraction(rest[-1]))
        if form == "table":
            body = " ".join(rest)
            rows = re.findall(r"\(([^)]*)\)", body)
            tuples = frozenset(tuple(int(x) for x in row.split(",") if x.strip()) for row in rows)
            if len({len(t) for t in tuples}) > 1:
                raise ParseError(f"Table {cid} mixes tuple lengths")
            return TableConstraint(cid, tuples)
        if form == "mod":
            var = int(rest[2]) - 1 if len(rest) > 2 else 0
            return ModCountConstraint(cid, int(rest[0]), int(rest[1]), var)
        if form == "oracle":
            name = rest[0]
            if name not in ORACLES:
                raise ParseError(f"Unknown oracle '{name}' in constraint {cid}")
            arity = ORACLES[name][0]
            args = [int(x) - 1 for x in rest[1:1 + arity]] + [int(x) for x in rest[1 + arity:]]
            return OracleConstraint(cid, name, tuple(args))
        if form in ORACLES:
            arity = ORACLES[form][0]
            args = [int(x) - 1 for x in rest[:arity]] + [int(x) for x in rest[arity:]]
            return OracleConstraint(cid, form, tuple(args))
    except (ValueError, IndexError, ZeroDivisionError, ValidationError) as e:
        raise ParseError(f"Malformed global constraint {cid}: {e}")
    raise ParseError(f"Unknown global constraint form '{form}'")


# ----------------------------------------------------------------------------
# Pre-evaluations
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PreEvaluation:
    """Guessed truth values for the global constraints, keyed by id."""

    values: Tuple[Tuple[str, bool], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, bool]) -> "PreEvaluation":
        return cls(tuple(sorted(mapping.items())))

    def __getitem__(self, cid: str) -> bool:
        for key, value in self.values:
            if key == cid:
                return value
        raise KeyError(cid)

    def get(self, cid: str, default: Optional[bool] = None) -> Optional[bool]:
        try:
            return self[cid]
        except KeyError:
            return default

    def __contains__(self, cid: str) -> bool:
        return any(key == cid for key, _ in self.values)

    def as_dict(self) -> Dict[str, bool]:
        return dict(self.values)

    def __str__(self):
        if not self.values:
            return "{}"
        return "{" + ", ".join(f"{k}={'T' if v else 'F'}" for k, v in self.values) + "}"


def compliance_check(sizes: Sequence[int], beta: PreEvaluation,
                     globals_: Sequence[GlobalConstraint]) -> bool:
    """True iff every constraint's verdict on ``sizes`` equals its value in ``beta``."""
    for gc in globals_:
        expected = beta.get(gc.cid)
        if expected is None:
            continue
        if eval_global(gc, sizes) != expected:
            return False
    return True


# ----------------------------------------------------------------------------
# Local constraints
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalConstraint:
    """Admissible counts of ``|N(v) & X_i|`` for one vertex.

    With ``condition = j`` the set ``allowed`` applies when ``v`` is in
    ``X_j`` and ``allowed_out`` otherwise.
    """

    allowed: IntervalSet
    condition: Optional[int] = None
    allowed_out: Optional[IntervalSet] = None

    def __post_init__(self):
        if self.condition is not None and self.allowed_out is None:
            object.__setattr__(self, "allowed_out", IntervalSet.full())

    @property
    def is_conditional(self) -> bool:
        return self.condition is not None

    def admits(self, count: int, in_condition: bool = True) -> bool:
        if self.condition is None or in_condition:
            return count in self.allowed
        return count in self.allowed_out

    def sets(self) -> Tuple[IntervalSet, ...]:
        if self.condition is None:
            return (self.allowed,)
        return (self.allowed, self.allowed_out)

    def is_trivial(self, degree: int) -> bool:
        return all(s.covers(0, degree) for s in self.sets())

    @property
    def is_interval(self) -> bool:
        return self.condition is None and self.allowed.is_interval

    @property
    def is_fair(self) -> bool:
        return self.is_interval and (self.allowed.is_empty or self.allowed.min == 0)

    def restrict(self, other: IntervalSet) -> "LocalConstraint":
        out = self.allowed_out.intersect(other) if self.allowed_out is not None else None
        return replace(self, allowed=self.allowed.intersect(other), allowed_out=out)


UNCONSTRAINED = LocalConstraint(IntervalSet.full())


@dataclass(frozen=True)
class LocalConstraintMap:
    """The maps alpha_1..alpha_l: per-variable defaults plus per-vertex entries."""

    ell: int
    n: int
    defaults: Tuple[Optional[LocalConstraint], ...] = ()
    entries: Mapping[Tuple[int, int], LocalConstraint] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.defaults) < self.ell:
            object.__setattr__(self, "defaults",
                               tuple(self.defaults) + (None,) * (self.ell - len(self.defaults)))

    def get(self, i: int, v: int) -> LocalConstraint:
        entry = self.entries.get((i, v))
        if entry is not None:
            return entry
        default = self.defaults[i]
        return default if default is not None else UNCONSTRAINED

    def is_declared(self, i: int, v: int) -> bool:
        return (i, v) in self.entries or self.defaults[i] is not None

    @property
    def is_empty(self) -> bool:
        return not self.entries and all(d is None for d in self.defaults)

    def constraints(self) -> Iterator[Tuple[int, int, LocalConstraint]]:
        for i in range(self.ell):
            for v in range(self.n):
                if self.is_declared(i, v):
                    yield i, v, self.get(i, v)

    def restricted(self, i: int, bound: IntervalSet) -> "LocalConstraintMap":
        """Intersect every set of variable ``i`` with ``bound`` (undeclared vertices included)."""
        defaults = list(self.defaults)
        defaults[i] = (defaults[i] or UNCONSTRAINED).restrict(bound)
        entries = {key: (lc.restrict(bound) if key[0] == i else lc) for key, lc in self.entries.items()}
        return LocalConstraintMap(self.ell, self.n, tuple(defaults), entries)

    def is_uniform_on(self, i: int, vertices: Sequence[int]) -> bool:
        return len({self.get(i, v) for v in vertices}) <= 1

    def conditions(self) -> FrozenSet[int]:
        return frozenset(lc.condition for _, _, lc in self.constraints() if lc.condition is not None)
