"""Exception hierarchy shared by all modules."""


class FreeFallError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FreeFallError, ValueError):
    """The loop is (numerically) the zero loop, outside the punctured space."""


class NonConvergence(FreeFallError):
    """An iterative solver ran out of iterations or flow time."""


class Divergence(FreeFallError):
    """A flow line escapes to infinity."""


class EigenFailure(FreeFallError):
    pass


class NotOnCircle(FreeFallError, ValueError):
    """A loop is not close enough to a critical circle to read off its phase."""


class SweepFailure(FreeFallError):
    pass


class NoRegularValue(FreeFallError):
    pass


class AmbiguousCrossing(FreeFallError):
    pass


class GridMismatch(FreeFallError, ValueError):
    pass


class NotAComplex(FreeFallError):
    """The boundary operator does not square to zero."""


class ConsistencyFailure(FreeFallError):
    pass


class ConfigError(FreeFallError, ValueError):
    pass
