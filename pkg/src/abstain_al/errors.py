"""Exception types raised across the package."""


class AbstainError(Exception):
    """Base class for all package errors."""


class InvalidConfig(AbstainError, ValueError):
    """A parameter is outside its admissible range."""


class OutOfDomain(AbstainError, ValueError):
    """A point lies outside the unit cube."""


class BudgetExhausted(AbstainError, RuntimeError):
    """The label budget has been fully consumed."""


class DegenerateConfig(AbstainError, ValueError):
    """The available probability mass cannot reach the requested level."""


class NoData(AbstainError, RuntimeError):
    """An estimate was requested before any observation was logged."""


class InsufficientBudget(AbstainError, RuntimeError):
    """The budget did not suffice to bracket a level set.

    ``partial`` carries whatever estimate could be formed (possibly None).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnsupportedModel(AbstainError, ValueError):
    """The requested query model is not supported by this routine."""
