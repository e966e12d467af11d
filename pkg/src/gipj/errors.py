"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where a quantity is defined."""


class ConvergenceError(ArithmeticError):
    """An iterative procedure failed to meet its stopping criterion."""


class ConfigError(ValueError):
    """Malformed or inconsistent initial-data or run configuration."""


class InvariantViolation(AssertionError):
    """An internal consistency check failed."""


class GuardBandError(DomainError):
    """Requested point lies inside the guard band just below the blow-up parameter."""
