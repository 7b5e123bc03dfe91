"""Exception hierarchy shared by all modules.

Numerical failures (``NumericalFailure`` subclasses) are distinguished from
input/validation errors so the CLI can map them onto different exit codes.
"""


class CrystallineError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(CrystallineError, ValueError):
    """Input violates a documented precondition."""


class NotNormalized(ValidationError):
    pass


class NoFunctionalEquation(ValidationError):
    pass


class ZeroTopCoefficient(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class ZeroColumnSum(ValidationError):
    pass


class EntryOutOfRange(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class Unsupported(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class NotSelfDual(ValidationError):
    pass


class NotSelfConjugate(ValidationError):
    pass


class TooFewAtoms(ValidationError):
    pass


class WindowExceeded(ValidationError):
    pass


class ConfigInvalid(ValidationError):
    pass


class NumericalFailure(CrystallineError, ArithmeticError):
    """A computation could not reach its accuracy contract."""


class WindowTooCoarse(NumericalFailure):
    pass


class TailTooLarge(NumericalFailure):
    pass


class PrecisionUnattainable(NumericalFailure):
    pass
