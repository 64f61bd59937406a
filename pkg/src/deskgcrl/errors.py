"""Exception types shared across the package."""


class DeskGcrlError(Exception):
    pass


class InvalidSpecError(DeskGcrlError, ValueError):
    """Malformed network or collector specification."""


class ShapeError(DeskGcrlError, ValueError):
    """Array shapes incompatible with the requested operation."""


class UnsupportedOpError(DeskGcrlError, ValueError):
    """Operation not available for this node kind, env, or agent pairing."""


class NumericError(DeskGcrlError, ArithmeticError):
    """Non-finite value encountered; carries the op name that produced it."""

    def __init__(self, message, op=None):
        super().__init__(message)
        self.op = op


class InvalidArgError(DeskGcrlError, ValueError):
    pass


class CapacityError(DeskGcrlError, ValueError):
    """Problem size exceeds the exhaustive-search budget."""


class NoPathError(DeskGcrlError, ValueError):
    """Requested cells are not connected in the layout."""


class FormatError(DeskGcrlError, ValueError):
    """Corrupt, truncated, or version-mismatched file."""


class InvalidStateError(DeskGcrlError, RuntimeError):
    pass


class ConfigError(DeskGcrlError, ValueError):
    """Bad run configuration (unknown key, missing value, unknown env/algo)."""


class MissingArtifactError(DeskGcrlError, FileNotFoundError):
    """A required dataset, checkpoint, or report file does not exist."""
