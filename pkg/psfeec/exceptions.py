"""Module contains custom exceptions for psfeec.

ClientError: Error caused by user input.
NumericalError: A numerical decision that cannot be taken safely.
Bug: Unexpected issue.
Notification: A verdict that failed, reported without a traceback.
"""
from typing import Optional, Sequence, Tuple

from psfeec.enums import ErrorType


class ClientError(Exception):
    """Exception to raise when client input causes problems.

    Args:
        message: Error message to display.
    """

    def __init__(self, message: str) -> None:
        self._message = message
        super().__init__(self._message)


class MeshFormatError(ClientError):
    """Mesh text does not follow the expected grammar.

    Args:
        message: Error message to display.
        line: 1-based line number of the offending line.
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = "line %s: %s" % (line, message)
        super().__init__(message)


class MeshValidityError(ClientError):
    """Mesh parses but violates a combinatorial or geometric requirement."""


class WellDefinednessError(ClientError):
    """Interior points of two neighbours do not cut their shared edge.

    Args:
        message: Error message to display.
        edge: Vertex pair of the offending macro-edge.
    """

    def __init__(self, message: str, edge: Tuple[int, int]) -> None:
        self.edge = edge
        super().__init__("edge %s: %s" % (edge, message))


class InadmissibleDegreeError(ClientError):
    """Requested polynomial degree is outside the admissible range."""


class QuadratureError(ClientError):
    """Requested quadrature exactness exceeds the available rules."""


class NumericalError(Exception):
    """Exception to raise when a numerical decision is not trustworthy.

    Args:
        message: Error message to display.
    """

    def __init__(self, message: str) -> None:
        self._message = message
        super().__init__(self._message)


class RankAmbiguityError(NumericalError):
    """A singular value landed inside the forbidden band."""


class ImageContainmentError(NumericalError):
    """Operator image of a basis column is not in the target space.

    Args:
        message: Error message to display.
        column: Offending source column.
        residual: Relative residual of the coordinate fit.
    """

    def __init__(self, message: str, column: int = -1, residual: float = 0.0) -> None:
        self.column = column
        self.residual = residual
        super().__init__(
            "%s (column %s, residual %.3e)" % (message, column, residual)
        )


class ResidualError(NumericalError):
    """A construction failed its residual check.

    Args:
        message: Error message to display.
        residuals: Per-step residuals recorded before the failure.
    """

    def __init__(self, message: str, residuals: Sequence[float] = ()) -> None:
        self.residuals = list(residuals)
        super().__init__(message)


class UnisolvenceError(NumericalError):
    """DOF matrix is singular to working tolerance."""


class Bug(Exception):
    """Should be used as a wild card exception to catch all unexpected exception.

    Args:
        message: Error message to display.
    """

    def __init__(self, message: str) -> None:
        self._message = message
        self._message += "\n"
        self._message += "Something went wrong with psfeec, please report this behavior together with the input mesh."
        super().__init__(self._message)


class Notification(Exception):
    """Used to report a failed verdict without a traceback.

    Args:
        message: Error message to display.
        error_type: Error type.
    """

    def __init__(self, message: str, error_type: ErrorType = ErrorType.error) -> None:
        self._message = message
        self.type = error_type
        super().__init__(self._message)
