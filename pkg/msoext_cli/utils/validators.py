"""
Validation utilities for the msoext solver toolkit.
"""
from typing import Any, Iterable

from .exceptions import ValidationError

GENERATORS = (
    "clique-lcc",
    "equitable",
    "equitable-connected",
    "capacitated-ds",
    "domination",
    "motif",
    "balanced",
    "multicover",
)


def validate_positive(name: str, value: int) -> None:
    """Validate a strictly positive integer parameter."""
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")


def validate_non_negative(name: str, value: int) -> None:
    """Validate a non-negative integer parameter."""
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValidationError(f"{name} must be a non-negative integer, got {value!r}")


def validate_vertex(v: int, n: int) -> None:
    """Validate a 0-indexed vertex id."""
    if not 0 <= v < n:
        raise ValidationError(f"Vertex {v + 1} out of range 1..{n}")


def validate_edges(n: int, edges: Iterable[tuple]) -> None:
    """Validate an undirected simple edge list over 0-indexed vertices."""
    for u, v in edges:
        validate_vertex(u, n)
        validate_vertex(v, n)
        if u == v:
            raise ValidationError(f"Self-loop at vertex {u + 1}")


def validate_variable_index(i: int, ell: int) -> None:
    """Validate a 1-indexed free variable reference."""
    if not 1 <= i <= ell:
        raise ValidationError(f"Free variable index {i} out of range 1..{ell}")


def validate_generator(name: str) -> None:
    """Validate a generator name."""
    if name not in GENERATORS:
        raise ValidationError(f"Unknown generator '{name}'. Choose one of: {', '.join(GENERATORS)}")


def validate_config_value(key: str, value: Any) -> None:
    """Validate a configuration key/value pair."""
    from .config_manager import LIMIT_KEYS
    if key == 'backend':
        if value not in ('automaton', 'bruteforce'):
            raise ValidationError("backend must be 'automaton' or 'bruteforce'")
        return
    if key not in LIMIT_KEYS:
        raise ValidationError(f"Unknown configuration key '{key}'")
    validate_positive(key, value)
