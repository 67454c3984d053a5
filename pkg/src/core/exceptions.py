"""Domain exception hierarchy.

Every error also subclasses ``ValueError`` so callers that only know the
builtin contract (and the CLI's exit-code mapping) keep working.
"""


class HsReconError(ValueError):
    """Base class for all toolkit errors."""


class CubeFormatError(HsReconError):
    """Header/raster files are missing, unreadable or mutually inconsistent."""


class InvalidImageError(HsReconError):
    """A raster or cube violates its type invariants."""


class ShapeMismatchError(HsReconError):
    """Two operands that must agree in shape do not."""


class ConfigError(HsReconError):
    """A spec or pipeline configuration is invalid."""


class TransformError(HsReconError):
    """Curvelet pyramid is malformed or the image is too small to transform."""


class TrainingError(HsReconError):
    """The dataset cannot be used to train or evaluate a classifier."""
