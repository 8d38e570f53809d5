"""Exception types raised by the synodyne package.

Argument and configuration problems derive from :class:`ValueError`;
numerical breakdowns derive from :class:`ArithmeticError`.  The CLI maps the
two families onto exit codes 1 and 2.
"""


class SynodyneError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SynodyneError, ValueError):
    """A physical parameter is out of its allowed range."""


class AmbiguousCouplingError(InvalidParameterError):
    """Both or neither of ``g`` and ``c_om`` were supplied."""


class UnsupportedDetuningError(InvalidParameterError):
    """Only resonant pumping (detuning zero) is implemented."""


class ZeroIntensityError(InvalidParameterError):
    """Both local-oscillator tones vanish."""


class NoSignalError(InvalidParameterError):
    """The detector has no phase-quadrature weight and cannot see a force."""


class NoTransductionError(InvalidParameterError):
    """Zero optomechanical coupling: the mechanics does not reach the light."""


class InvalidInputError(SynodyneError, ValueError):
    """Malformed records, grids or configuration values."""


class StepTooLargeError(InvalidInputError):
    """Integration step violates the stability margin of the drift matrix."""


class NumericalError(SynodyneError, ArithmeticError):
    """A numerical routine failed (singular solve, non-finite output)."""


class OptimizationError(NumericalError):
    """A minimizer could not bracket or converge."""
