"""Exception hierarchy shared across the package."""


class CociError(Exception):
    """Base class for all library errors."""


class UsageError(CociError):
    """An operation was called with arguments that violate its contract."""


class DomainError(CociError):
    """Inputs are well-formed but outside the mathematical domain."""


class CapacityError(CociError):
    """A computation would exceed a configured enumeration/size limit."""


class DegenerateInstanceError(CociError):
    """The problem instance violates the unique-optimum assumption."""


class ConfigError(CociError):
    """An experiment configuration failed validation.

    Carries the dotted path of the offending field so CLI users can locate
    the problem in their config file.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
