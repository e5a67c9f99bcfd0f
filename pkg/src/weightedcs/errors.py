"""Exception hierarchy shared by all modules."""


class WeightedCSError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(WeightedCSError, ValueError):
    pass


class ZeroNormAtom(WeightedCSError, ValueError):
    pass


class InvalidDimension(WeightedCSError, ValueError):
    pass


class InvalidRange(WeightedCSError, ValueError):
    pass


class InvalidExponent(WeightedCSError, ValueError):
    pass


class InvalidSparsity(WeightedCSError, ValueError):
    pass


class InvalidCoherence(WeightedCSError, ValueError):
    pass


class NotApplicable(WeightedCSError, ValueError):
    """The coherence condition mu * (2s - 1) < 1 does not hold."""


class TooLarge(WeightedCSError, ValueError):
    """An exhaustive enumeration would exceed its configured cap."""


class ZeroResidual(WeightedCSError, ValueError):
    pass


class RankDeficientActiveSet(WeightedCSError, ArithmeticError):
    """The atoms chosen by a greedy pursuit are numerically dependent."""

    def __init__(self, message, active=None):
        super().__init__(message)
        self.active = list(active) if active is not None else []


class NotConvergedWarning(RuntimeWarning):
    """The iteration cap was hit before the stopping tests passed."""
