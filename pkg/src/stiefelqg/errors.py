"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`ValidationError` subclasses to exit code 2 and
:class:`NumericalError` subclasses to exit code 3, printing the class
name as a single token on the first line of stderr.
"""


class StiefelQGError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StiefelQGError):
    """An input violates a structural, shape or parsing contract."""


class NumericalError(StiefelQGError):
    """A structurally valid request has no answer at this input."""


class NotOrthonormal(ValidationError):
    """Columns of a supposed frame fail the orthonormality residual."""


class ParseError(ValidationError):
    """A matrix file or CLI argument could not be parsed."""


class DimensionError(ValidationError):
    """Operation undefined for these dimensions (e.g. p > n - p)."""


class ValueOutOfRange(ValidationError):
    """A scalar argument lies outside its admissible interval."""


class BaseMismatch(ValidationError):
    """Tangent vectors anchored at different base points were combined."""


class EigenvalueAtMinusOne(NumericalError):
    """Principal matrix logarithm undefined: eigenvalue at -1."""


class OrientationMismatch(NumericalError):
    """Determinant is -1 where a special-orthogonal matrix is required."""


class SubspaceAngleTooLarge(NumericalError):
    """A principal angle of pi/2 makes the endpoint problem singular."""


class NoConvergence(NumericalError):
    """Iteration exhausted its budget before meeting the tolerance."""
