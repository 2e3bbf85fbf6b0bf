"""Exception types shared across the package."""


class DimensionError(ValueError):
    """A vector or parameter set has the wrong (or an odd) dimension."""


class LengthError(ValueError):
    """A bit-string does not have the length a codec or record expects."""


class DecodeFailure(Exception):
    """The decoder detected an error pattern it cannot correct."""


class RecoverFailure(Exception):
    """Key recovery from helper data failed before verification."""


class FormatError(ValueError):
    """A record file is corrupt, truncated or otherwise unparsable."""


class VersionError(FormatError):
    """A record file declares a format version this library cannot read."""


class DatasetError(ValueError):
    """A dataset file failed validation; ``row`` is the 1-based file line."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NoCrossingError(ValueError):
    """FAR and FRR never cross on the supplied curve.

    ``closest`` holds ``(knob, far, frr)`` for the point where the two rates
    are nearest to each other.
    """

    def __init__(self, message, closest):
        super().__init__(message)
        self.closest = closest
