"""Exception types shared across the package."""

from __future__ import annotations


class ABFlowError(Exception):
    """Base class for all abflow errors."""


class SingularMatrixError(ABFlowError):
    """A solve target is numerically singular (pivot below the cutoff)."""


class SingularDenominatorError(SingularMatrixError):
    """The denominator sum of a rational matrix update is singular."""


class DimensionMismatchError(ABFlowError, ValueError):
    """Operands live in incompatible spaces."""


class BreakdownError(ABFlowError):
    """An iteration step required inverting a numerically singular sum.

    Attributes
    ----------
    index : int or None
        Iterate index that could not be produced (outer index for
        accelerated runs).
    inner_index : int or None
        Position ``ell`` inside an inner chain, when the failing solve
        happened there.
    """

    def __init__(self, message: str, index: int | None = None,
                 inner_index: int | None = None):
        super().__init__(message)
        self.index = index
        self.inner_index = inner_index


class PoleEncounteredError(ABFlowError, ArithmeticError):
    """An eigenvalue map was evaluated at a pole of its rational form."""


class InvalidBoundsError(ABFlowError, ValueError):
    """Interval bounds are empty, unordered, or nonpositive."""


class InvalidSpectrumError(ABFlowError, ValueError):
    """A requested spectrum violates the generator's preconditions."""


class InsufficientDataError(ABFlowError, ValueError):
    """Too few samples to compute the requested estimate."""


class ParseError(ABFlowError):
    """A matrix file is malformed; carries position information."""

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None, offset: int | None = None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        if offset is not None:
            loc += f":{offset}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.offset = offset


class ShapeError(ParseError):
    """Matrix file rows have inconsistent lengths or impossible shape."""
