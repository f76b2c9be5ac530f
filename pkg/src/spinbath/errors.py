"""Exception types raised by the spinbath modules."""


class SpinBathError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(SpinBathError, ValueError):
    pass


class UnsupportedSchemeError(SpinBathError, ValueError):
    pass


class SizeLimitError(SpinBathError, ValueError):
    pass


class RegimeMismatchError(SpinBathError, ValueError):
    pass


class DegenerateFitError(SpinBathError, ValueError):
    pass


class PrecisionExceededError(SpinBathError, ArithmeticError):
    pass


class EnergyOverflowError(SpinBathError, OverflowError):
    pass


class NonMonicError(SpinBathError, ValueError):
    pass


class NoDominantRootError(SpinBathError, ValueError):
    pass


class RepeatedRootError(SpinBathError, ValueError):
    pass


class VerdictWithheldError(SpinBathError, ArithmeticError):
    """A conjugate modulus sits within the certification margin of 1."""

    def __init__(self, margin, bound):
        super().__init__(
            f"|margin| = {abs(margin):.3e} is within certification bound {bound:.3e}; verdict withheld"
        )
        self.margin = margin
        self.bound = bound
