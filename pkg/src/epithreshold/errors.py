"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: invalid configuration -> 2,
numerical failure -> 3, unmet mathematical precondition -> 4.
"""


class EpithresholdError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfigError(EpithresholdError):
    """A scenario, grid, or parameter fails validation (exit code 2)."""


class NumericalError(EpithresholdError):
    """An iterative method failed to converge or a solve broke down (exit code 3)."""


class ConditionNotMetError(EpithresholdError):
    """A mathematical precondition of the requested analysis does not hold (exit code 4)."""
