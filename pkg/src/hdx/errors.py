"""Exception hierarchy shared by all hdx modules."""

from __future__ import annotations


class HdxError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HdxError, ValueError):
    pass


class IndexOutOfRange(HdxError, IndexError):
    pass


class DegreeViolation(HdxError, ValueError):
    pass


class RingMismatch(HdxError, TypeError):
    pass


class NotUnitriangular(HdxError, ValueError):
    pass


class GroupTooLarge(HdxError):
    """Raised when a closure would exceed its element cap."""

    def __init__(self, message: str, partial_size: int = 0, cap: int = 0):
        super().__init__(message)
        self.partial_size = partial_size
        self.cap = cap


class ForeignElement(HdxError, ValueError):
    pass


class Unreachable(HdxError):
    pass


class NotGenerating(HdxError):
    pass


class ShapeMismatch(HdxError, ValueError):
    pass


class NotAFace(HdxError, KeyError):
    pass


class NotPure(HdxError, ValueError):
    pass


class DimMismatch(HdxError, ValueError):
    pass


class SearchSpaceTooLarge(HdxError):
    """An exhaustive search would exceed its configured budget."""

    def __init__(self, message: str, log2_size: float = 0.0, log2_budget: float = 0.0):
        super().__init__(message)
        self.log2_size = log2_size
        self.log2_budget = log2_budget


class TooManyVertices(HdxError):
    pass


class NoGroupAttached(HdxError):
    pass


class HypothesisUnmet(HdxError):
    pass


class NotEdgeTransitive(HdxError):
    pass


class Disconnected(HdxError):
    pass


class NoMatch(HdxError, ValueError):
    pass


class PathBroken(HdxError, ValueError):
    pass


class TraceInvalid(HdxError, ValueError):
    pass


class InvariantViolation(HdxError, AssertionError):
    """An internal mathematical invariant failed; always a bug or corrupt input."""
