"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A spec, profile or run configuration violates its invariants."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StepSizeError(RuntimeError):
    """A time integrator detected a stability problem at the current step."""
