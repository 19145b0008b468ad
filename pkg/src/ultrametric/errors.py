"""Exception hierarchy.

Two families matter to callers: :class:`InputFormatError` for data that
cannot be parsed at all, and :class:`PreconditionError` for well-formed
data that violates an operation's requirements.  Both derive from
:class:`ValueError` so generic handlers keep working.
"""


class UltrametricError(Exception):
    """Base class for all package errors."""


class InputFormatError(UltrametricError, ValueError):
    """Malformed file or unparseable input."""


class PreconditionError(UltrametricError, ValueError):
    """Input is well-formed but violates an operation's precondition."""


class InvalidMatrixError(PreconditionError):
    """Matrix is not a valid dissimilarity matrix (shape, symmetry, sign)."""


class NotUltrametricError(PreconditionError):
    """Matrix fails the strong triangle inequality."""


class InvalidDendrogramError(PreconditionError):
    """Node list does not describe a binary rooted ranked tree."""


class TooFewObjectsError(PreconditionError):
    """Operation needs more objects than were supplied."""


class DegenerateColumnError(PreconditionError):
    """A column sums to zero and cannot be normalized."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column!r} has zero sum")


class IncompatibleError(PreconditionError):
    """Operands differ in length, base or level count."""


class ExhaustedError(PreconditionError):
    """Dilation applied to a code set with no levels left."""


class DegenerateInputError(PreconditionError):
    """Input has too little variation for the requested fit."""
