"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of the requested operation
    (for example a matrix that should be positive definite but is not)."""


class ShapeError(ValueError):
    """Array dimensions are incompatible with the operation."""


class ConvergenceError(RuntimeError):
    """An iterative method stopped before reaching its tolerance.

    ``residual`` carries the last measured residual so callers can
    judge how far from convergence the iteration was.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalError(RuntimeError):
    """A numerical breakdown (loss of positivity, singular factorization)."""


class ParseError(ValueError):
    """Malformed input file; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
