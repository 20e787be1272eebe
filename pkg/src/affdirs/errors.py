"""Error types shared across the package.

The command-line driver maps these onto distinct exit codes, so library
code should raise the most specific one that applies.
"""


class ConfigError(ValueError):
    """Invalid configuration, argument, or input value."""


class BudgetError(RuntimeError):
    """A resource budget (point count, search bound) would be exceeded."""

    def __init__(self, message, bound_reached=None):
        super().__init__(message)
        self.bound_reached = bound_reached


class NumericError(ArithmeticError):
    """Numerical failure: ill-conditioning, overflow, lost precision."""
