"""Exception hierarchy shared by every module."""


class LatransError(Exception):
    """Base class for all library errors."""


class InvalidOrder(LatransError, ValueError):
    pass


class InvalidSquare(LatransError, ValueError):
    pass


class UnsupportedOrder(LatransError, ValueError):
    pass


class ConstructionFailed(LatransError, RuntimeError):
    pass


class NotOrthogonal(LatransError, ValueError):
    pass


class NotAPermutation(LatransError, ValueError):
    pass


class TooLarge(LatransError, ValueError):
    """Raised when an exhaustive routine is asked to run past its cost guard."""


class NotATransversal(LatransError, ValueError):
    pass


class KTooSmall(LatransError, ValueError):
    pass


class EllTooSmall(LatransError, ValueError):
    pass


class UnsupportedSubsquareOrder(LatransError, ValueError):
    pass


class TooSmallTarget(LatransError, ValueError):
    pass


class STooSmall(LatransError, ValueError):
    pass


class STooLarge(LatransError, ValueError):
    pass


class LStarConstructionFailed(ConstructionFailed):
    pass


class DomainError(LatransError, ValueError):
    pass


class BoundViolation(LatransError, AssertionError):
    """A theorem-backed inequality failed; always an implementation bug."""


class ParseError(LatransError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ConfigError(LatransError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
