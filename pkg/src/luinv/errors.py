"""Exception hierarchy shared by all luinv modules."""


class LUInvError(Exception):
    """Base class for every error raised by luinv."""


class NotHermitian(LUInvError, ValueError):
    pass


class BadDimension(LUInvError, ValueError):
    pass


class NotNormalized(LUInvError, ValueError):
    pass


class NotPSD(LUInvError, ValueError):
    pass


class DimensionMismatch(LUInvError, ValueError):
    pass


class SingularOmega(LUInvError, ArithmeticError):
    """The metric tensor cannot be inverted (non-generic state)."""


class NoIntertwiner(LUInvError):
    """The two operator families admit no nonzero intertwiner."""


class AmbiguousIntertwiner(LUInvError):
    """The intertwiner space has dimension > 1, so the families are reducible."""


class NotScalar(LUInvError):
    """V^dag V is not proportional to the identity."""


class VerificationFailed(LUInvError):
    """An assembled witness does not map the first state onto the second."""


class SearchBudgetExceeded(LUInvError):
    """Too many relabelings inside degenerate eigenvalue blocks."""
