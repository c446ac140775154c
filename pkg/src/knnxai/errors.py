"""Exception hierarchy shared by every solver in the package."""


class KnnXaiError(Exception):
    """Base class for all errors raised by knnxai."""


class InputError(KnnXaiError, ValueError):
    """Malformed input: wrong dimension, domain, parity of k, file format."""


class DimensionMismatch(InputError):
    pass


class DomainMismatch(InputError):
    pass


class UnsupportedSetting(KnnXaiError):
    """No algorithm is available for the requested (metric, k) combination."""


class DegenerateBisector(KnnXaiError):
    """The two points defining a bisector coincide."""


class InfeasibleError(KnnXaiError):
    pass


class NoInteriorDirection(KnnXaiError):
    pass


class IterationLimit(KnnXaiError):
    """An iterative kernel hit its cap; carries the best iterate found."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class ResourceLimit(KnnXaiError):
    """An enumeration budget was exceeded; ``progress`` says how far it got."""

    def __init__(self, message, progress=None):
        super().__init__(message)
        self.progress = progress or {}


class PreconditionError(InputError):
    pass


class BackendError(KnnXaiError):
    """External solver failed or produced output we could not parse."""


class InternalError(KnnXaiError):
    """A result failed its own post-verification; indicates a bug."""
