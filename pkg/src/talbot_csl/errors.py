"""Exception types raised across the package."""


class TalbotError(Exception):
    """Base class for all package errors."""


class ConfigError(TalbotError, ValueError):
    """Invalid, missing or unknown configuration entry."""


class OpticalTableError(TalbotError, ValueError):
    """Malformed optical-constants file."""


class OpticalRangeError(TalbotError, ValueError):
    """Query outside the wavelength coverage of an optical table."""


class QuadratureError(TalbotError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The best estimate reached so far is kept on ``estimate`` together with
    its error bound ``error``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NumericIntegrityError(TalbotError, ArithmeticError):
    """A physical result came out inconsistent (complex residue, P <= 0, ...)."""


class IntegrationError(NumericIntegrityError):
    """The internal-temperature ODE became unstable."""
