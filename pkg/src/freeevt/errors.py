"""Exception hierarchy shared by all freeevt modules."""


class FreeEVTError(Exception):
    """Base class for library errors."""


class NumericError(FreeEVTError):
    """A numerical routine could not deliver a trustworthy answer."""


class QuadratureError(NumericError):
    def __init__(self, message, partial=None, error=None):
        super().__init__(message)
        self.partial = partial
        self.error = error


class DomainError(NumericError, ValueError):
    pass


class NoSignChange(NumericError, ValueError):
    pass


class LimitNotDetected(NumericError):
    pass


class InvalidLaw(FreeEVTError, ValueError):
    pass


class InvalidProbability(FreeEVTError, ValueError):
    pass


class InvalidPower(FreeEVTError, ValueError):
    pass


class DegeneratePower(FreeEVTError, ValueError):
    pass


class NoNormingKnown(FreeEVTError, ValueError):
    pass


class NoDensity(FreeEVTError, ValueError):
    pass


class ParseError(FreeEVTError, ValueError):
    pass


class ProfileFactorizationError(FreeEVTError, ValueError):
    """The density does not factor as ``C(x) * base(x)`` on the sampled points."""


class HypothesisViolation(FreeEVTError):
    """A density profile failed one or more of the regularity conditions.

    ``conditions`` lists the labels of the failed checks (e.g. ``"G-Cond1-1"``).
    """

    def __init__(self, message, conditions=()):
        super().__init__(message)
        self.conditions = tuple(conditions)
