class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class OutOfRangeError(ValueError):
    """Query outside the simulated window or horizon."""


class ConsistencyError(RuntimeError):
    """A numerical postcondition failed, e.g. a tabulated CDF is not monotone."""
