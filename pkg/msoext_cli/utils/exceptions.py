"""
Custom exceptions for the msoext solver toolkit.
"""
from typing import Optional


class MSOError(Exception):
    """Base exception for msoext errors."""
    pass


class ParseError(MSOError):
    """Exception raised when formula, graph or instance text is malformed."""

    def __init__(self, message: str, position: Optional[int] = None, line: Optional[int] = None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where = f" (line {line})"
        elif position is not None:
            where = f" (at position {position})"
        super().__init__(f"{message}{where}")


class UnboundVariable(MSOError):
    """Exception raised for a variable that is neither quantified nor free."""
    pass


class UnknownGlobalConstraint(MSOError):
    """Exception raised for a #card(id) atom naming an undeclared constraint."""
    pass


class ValidationError(MSOError):
    """Exception raised for validation errors."""
    pass


class InvalidDecomposition(MSOError):
    """Exception raised when a decomposition violates its defining conditions."""
    pass


class VertexNotInDecomposition(MSOError):
    """Exception raised when a vertex occurs in no bag."""
    pass


class ResourceLimit(MSOError):
    """Exception raised when a configured work cap is exceeded."""
    pass


class OracleFailure(MSOError):
    """Exception raised when an oracle global constraint cannot be evaluated."""
    pass


class Infeasible(MSOError):
    """Exception raised when a subproblem has no solution."""
    pass


class UnboundedVariable(MSOError):
    """Exception raised when an ILP variable lacks finite bounds."""
    pass


class LocalityViolation(MSOError):
    """Exception raised when a new scope edge does not fit one decomposition node."""
    pass


class UnknownKind(MSOError):
    """Exception raised for an unknown problem kind."""
    pass


class ColorMissing(MSOError):
    """Exception raised when a graph motif vertex carries no color label."""
    pass


class ShapeViolation(MSOError):
    """Exception raised when an LCC instance does not have the gadget shape."""
    pass


class NonUniform(MSOError):
    """Exception raised when demands differ inside one type."""
    pass


class UnsupportedError(MSOError):
    """Base exception for inputs outside what a solver path can handle."""
    pass


class UnsupportedPredicate(UnsupportedError):
    """Exception raised when a formula falls outside the predicate algebra."""
    pass


class UnsupportedFragment(UnsupportedError):
    """Exception raised when a solver is asked for a fragment it does not decide."""
    pass


class WitnessRejected(MSOError):
    """Exception raised when a solver witness fails independent verification."""
    pass
