"""Exception hierarchy shared by every module."""


class SketchIQAError(Exception):
    """Base class for all domain errors raised by this package."""


class ShapeError(SketchIQAError, ValueError):
    """Images or vectors that must agree in shape do not."""


class SizeError(SketchIQAError, ValueError):
    """An image is too small for the requested operation."""


class ParameterError(SketchIQAError, ValueError):
    """A parameter violates its documented invariants."""


class ConfigurationError(SketchIQAError, ValueError):
    """Inputs are structurally unusable (empty gallery, empty training set, ...)."""


class NumericalError(SketchIQAError, ArithmeticError):
    """A linear system could not be solved reliably."""


class DegenerateDataError(SketchIQAError, ValueError):
    """Data carries no usable variance."""


class DataError(SketchIQAError, ValueError):
    """Labels or identities are inconsistent across collections."""


class FormatError(SketchIQAError, ValueError):
    """An image file cannot be decoded into a supported format."""
