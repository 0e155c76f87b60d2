"""Exception types raised by the library."""


class LocalizerError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(LocalizerError, ValueError):
    """Two objects that must share a dimension do not."""


class NotInvertibleError(LocalizerError):
    """An operator or matrix is singular at the working tolerance."""


class OddSignatureError(LocalizerError):
    """A signature that must be even came out odd."""


class SymmetryError(LocalizerError):
    """A declared symmetry relation fails beyond tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(LocalizerError):
    """A refinement loop failed to reach its target accuracy."""
