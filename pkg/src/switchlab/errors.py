"""Shared exception types."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """Structural precondition violated (wrong shape, broken invariant)."""


class ResourceLimitError(RuntimeError):
    """Instance too large for an exhaustive / brute-force routine."""


class ConvergenceError(RuntimeError):
    """Iterative routine exhausted its budget without converging."""
