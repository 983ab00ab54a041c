"""Exception hierarchy shared by the solvers and the command line."""


class QuadspecError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(QuadspecError):
    """A computation could not deliver a trustworthy number."""


class NotPositiveDefinite(NumericalError):
    """Cholesky met a non-positive pivot; usually the basis outgrew the precision."""


class IterationLimit(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class EmptyResult(QuadspecError):
    pass


class InvalidParameter(QuadspecError, ValueError):
    pass


class InvalidArgument(QuadspecError, ValueError):
    pass


class InternalError(QuadspecError):
    pass
