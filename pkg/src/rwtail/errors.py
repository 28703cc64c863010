"""Exception hierarchy shared by all rwtail modules."""


class RWTailError(Exception):
    """Base class for library errors."""


class DomainError(RWTailError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(RWTailError, ValueError):
    """An object was assembled from incompatible or incomplete parts."""


class PreconditionError(RWTailError, ValueError):
    """A documented precondition of an operation does not hold."""


class NonConvergenceError(RWTailError, RuntimeError):
    """A root search or quadrature failed to converge."""


class StripViolationError(RWTailError, ValueError):
    """A requested moment lies outside the declared finite-moment strip."""


class IllDefinedLineError(RWTailError, ValueError):
    """The Mellin line sum is not known to converge."""


class NoCertificateError(RWTailError, ValueError):
    """No analytic bound is available for the requested tail sum."""


class GridMismatchError(RWTailError, ValueError):
    """Two curves were combined on different level grids."""


class EmptySampleError(RWTailError, ValueError):
    """An estimator received no observations."""


class DegenerateSampleError(RWTailError, ValueError):
    """Order statistics are tied so that an estimator is undefined."""
