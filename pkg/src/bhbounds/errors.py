"""Exception types shared across the package."""


class BHError(Exception):
    """Base class for all package errors."""


class NotHomogeneous(BHError):
    """A term's total degree does not match the polynomial degree."""


class DimensionMismatch(BHError):
    """A multi-index or point has the wrong number of variables."""


class InvalidParameter(BHError):
    """An argument is outside the documented domain of an operation."""


class ConvergenceFailure(BHError):
    """An iterative search failed to converge or to bracket its target."""


class ParseError(BHError):
    """Malformed polynomial file. Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
