"""Exception types shared across the package."""


class CiccgError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CiccgError, ValueError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(CiccgError, ValueError):
    """Matrix is not symmetric positive definite."""


class InvalidParameter(CiccgError, ValueError):
    """A parameter is outside its valid range."""


class EmptyInput(CiccgError, ValueError):
    """An operation received an empty sequence."""


class TooFewSamples(CiccgError, ValueError):
    """Not enough samples to fit an estimator."""


class NonFiniteModelOutput(CiccgError, FloatingPointError):
    """Model evaluation produced NaN or infinity."""


class NonFiniteGradient(CiccgError, FloatingPointError):
    """Gradient assembly produced NaN or infinity."""


class SingularRadial(CiccgError, FloatingPointError):
    """Radial penalty derivative is singular: shape < 2, smoothing = 0, and a
    copula residual sits exactly at the dependence center."""


class ZeroPreviousGradient(CiccgError, ZeroDivisionError):
    """Conjugate-gradient coefficient update received a zero previous gradient."""
