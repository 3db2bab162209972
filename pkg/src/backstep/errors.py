"""Exception hierarchy.  Every error names the operation or key at fault."""


class BackstepError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BackstepError, ValueError):
    """Invalid system parameters or run configuration."""


class RangeError(BackstepError, ValueError):
    """A parameter lies outside the interval where the construction is valid."""


class ShapeError(BackstepError, ValueError):
    """Mismatched sectors, lengths or truncations."""


class InsufficientSampleError(BackstepError, ValueError):
    pass


class HypothesisViolation(BackstepError, ValueError):
    """An estimate was requested outside the range where it is claimed."""


class SynthesisError(BackstepError, ArithmeticError):
    """The gain system is numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class UnsupportedNormalization(BackstepError, ValueError):
    pass


class SingularityError(BackstepError, ArithmeticError):
    """Repeated frequencies make a Gram matrix singular."""


class IllConditionedError(BackstepError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NumericalError(BackstepError, ArithmeticError):
    pass
