"""Exception types shared across the package."""


class MechlawsError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(MechlawsError, ValueError):
    """An operation received arguments that violate its contract."""


class DivergenceError(MechlawsError, ArithmeticError):
    """A state stopped being finite (or a step size underflowed).

    Carries ``time``, the time at which the failure was detected.
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class DegenerateModelError(MechlawsError):
    """Training collapsed: the whole feature spectrum fell below the cutoff."""
