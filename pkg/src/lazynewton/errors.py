"""Exception types shared across the library."""


class LazyNewtonError(Exception):
    """Base class for all library errors."""


class ContractViolation(LazyNewtonError):
    """A caller broke a documented precondition (e.g. dimension mismatch)."""


class ConfigError(LazyNewtonError):
    """Invalid or inconsistent configuration."""


class UnsupportedOperation(LazyNewtonError):
    """The requested oracle is not available for this problem kind."""


class ParseError(LazyNewtonError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NumericalFailure(LazyNewtonError):
    """An iterative routine produced NaN/Inf or failed to converge."""


class SingularShift(NumericalFailure):
    """(H + lambda*I) is singular to working precision; retry with larger lambda."""


class NonConvergence(NumericalFailure):
    """An iterative scheme exhausted its iteration budget."""


class Divergence(NumericalFailure):
    """Iterates blew up (typically a too-large first-order stepsize)."""
