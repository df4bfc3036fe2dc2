"""Exception hierarchy shared by the library and the command line front end."""


class EITError(Exception):
    """Base class for all library errors."""


class NumericalError(EITError):
    """A numerical evaluation could not produce a trustworthy value."""


class DegenerateDenominatorError(NumericalError, ZeroDivisionError):
    """The steady-state denominator vanished for the requested parameters."""


class SingularSystemError(NumericalError):
    """The brute-force steady-state linear system is singular."""


class FaddeevaOverflowError(NumericalError, OverflowError):
    """An exponential factor in the complex error function overflowed."""


class RootDegeneracyError(NumericalError):
    """The velocity-space poles of the Doppler integrand coincide or are undefined."""


class QuadratureConvergenceError(NumericalError):
    """Adaptive velocity quadrature exhausted its refinement budget."""


class CalibrationError(NumericalError):
    """No affine detuning mapping reproduced the absorption maxima."""


class NoPeakError(NumericalError):
    """A spectrum has no interior transmission maximum in the search window."""


class UnresolvedHalfMaxError(NumericalError):
    """A transmission peak never drops to half height inside the scanned grid."""


class FitError(NumericalError):
    """Base class for fitting failures."""


class FitConvergenceError(FitError):
    """The optimizer stopped without meeting its tolerance."""


class DataGridMismatchError(FitError, ValueError):
    """Measured data and model grid are inconsistent."""


class ConfigurationError(EITError, ValueError):
    """Invalid physical configuration or run configuration."""


class TemperatureRangeError(ConfigurationError):
    """Temperature outside the validity range of the vapor-pressure law."""
