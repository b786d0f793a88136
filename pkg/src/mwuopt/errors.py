"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`MWUError`,
so callers (notably the CLI) can separate input problems from bugs.
"""


class MWUError(Exception):
    """Base class for all package errors."""


class InputError(MWUError, ValueError):
    """Malformed or inconsistent user input."""


class NumericalError(MWUError, ArithmeticError):
    """A numerical precondition failed during a computation."""


# simplex
class NonFiniteError(InputError):
    pass


class NegativeEntryError(InputError):
    pass


class RowSumViolationError(InputError):
    pass


class EmptySupportRowError(NumericalError):
    pass


# objective
class ParseError(InputError):
    pass


class DenominatorNonPositiveError(NumericalError):
    pass


class HessianUnavailableError(MWUError):
    pass


# dynamics
class StepSizeTooLargeError(NumericalError):
    """MWU numerator or denominator is not positive: the step size is outside the safe regime."""


class ZeroDenominatorError(NumericalError):
    """Baum-Eagon renormalisation constant vanished."""


# spectral
class NotFixedPointError(NumericalError):
    pass


class NotInteriorFixedPointError(NotFixedPointError):
    pass


class NoConvergenceError(NumericalError):
    pass


# experiments / cli
class WitnessNotFoundError(NumericalError):
    pass


class ConfigError(InputError):
    pass
