"""Exception hierarchy. Each CLI exit code maps to one branch."""


class MPCAError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MPCAError, ValueError):
    pass


class DegenerateColumnError(InvalidInputError):
    def __init__(self, column: int, reason: str):
        self.column = column
        super().__init__(f"column {column}: {reason}")


class EmptyScaleError(MPCAError):
    """Raised when a scale interval selects no pairs of points."""

    def __init__(self, lower: float, upper: float):
        self.lower = lower
        self.upper = upper
        super().__init__(f"scale [{lower!r}, {upper!r}] selects zero pairs of points")


class EmptyGridError(InvalidInputError):
    pass


class InsufficientPointsError(MPCAError):
    pass


class ParseError(MPCAError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        prefix = ", ".join(loc)
        super().__init__(f"{prefix}: {message}" if prefix else message)
