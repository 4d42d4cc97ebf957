"""Exception types raised across fkpplab."""


class FKPPError(Exception):
    """Base class for all fkpplab errors."""


class InvalidBoundsError(FKPPError, ValueError):
    pass


class NonpositiveParameterError(FKPPError, ValueError):
    pass


class NonpositiveTimeError(FKPPError, ValueError):
    pass


class InvalidBetaError(FKPPError, ValueError):
    """G2 needs beta > U, otherwise its spatial slope is imaginary."""


class SubcriticalSpeedError(FKPPError, ValueError):
    """Raised when v**2 < 4*D*U, i.e. the momentum roots are complex."""


class OrderingError(FKPPError, ValueError):
    pass


class NoCrossingError(FKPPError, ValueError):
    pass


class InsufficientSamplesError(FKPPError, ValueError):
    pass


class InstabilityError(FKPPError, FloatingPointError):
    """The explicit update produced NaN or left [-0.5, 1.5]."""
