"""Exception types raised by the library.

Every error derives from :class:`AZError` so callers (and the CLI) can catch
the whole family at once.
"""


class AZError(ValueError):
    """Base class for all library errors."""


class NotHermitian(AZError):
    pass


class NotPositive(AZError):
    """An operator expected to be PSD has a clearly negative eigenvalue."""


class SpectrumOnCut(AZError):
    pass


class QuadratureNotConverged(AZError):
    pass


class SupportViolation(AZError):
    """supp(rho) is not contained in supp(sigma)."""


class SupportMismatch(SupportViolation):
    """supp(rho) and supp(sigma) were required to coincide."""


class ZeroZ(AZError):
    pass


class DegenerateExponent(AZError):
    pass


class SigmaNotPositiveDefinite(AZError):
    pass


class DimensionMismatch(AZError):
    pass


class Unsupported(AZError):
    pass


class DegenerateTopEigenvalue(AZError):
    pass


class InvalidSegmentSum(AZError):
    pass
