"""Exception types shared across the package."""


class NumericalError(ArithmeticError):
    """A quantity that must be finite and positive came out otherwise."""


class CapExceeded(ValueError):
    """An exhaustive computation was asked for more items than its cap allows."""
