class NovtelError(Exception):
    """Base class for all library errors."""


class ValidationError(NovtelError):
    """An exact identity (d^2 = 0, chain map, homotopy, unit, ...) failed."""

    def __init__(self, message: str, *, where=None):
        super().__init__(message)
        self.where = where


class ShapeError(NovtelError, ValueError):
    """Incompatible shapes, degrees or generator counts."""


class UnsupportedInput(NovtelError):
    """Input outside the supported class (e.g. a tail whose kernel chain does not stabilize)."""


class ResourceCapExceeded(NovtelError):
    """A configured cap on slices or terms was hit."""


class InvariantViolation(NovtelError):
    """Two independent computations that must agree did not."""
