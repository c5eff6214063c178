"""Exception hierarchy for the tmqi3 package."""


class TmqiError(Exception):
    """Base class for all package-specific errors."""


# --- image-core ------------------------------------------------------------

class ConstantImage(TmqiError):
    """Raised when an operation needs at least two distinct pixel values."""


class DimensionMismatch(TmqiError):
    """Raised when two rasters that must share dimensions do not."""


class ImageTooSmall(TmqiError):
    """Raised when an image is smaller than the operation's minimum size."""


class DomainError(TmqiError):
    """Raised when a scalar argument falls outside its documented domain."""


# --- file I/O ---------------------------------------------------------------

class BadMagic(TmqiError):
    """Stream does not start with a recognized format signature."""


class BadHeader(TmqiError):
    """Header is structurally invalid for the declared format."""


class UnsupportedOrientation(TmqiError):
    """Radiance resolution line is not the supported '-Y h +X w' form."""


class TruncatedScanline(TmqiError):
    """Pixel payload ended before a complete scanline was read."""


class BadRleRun(TmqiError):
    """An RLE packet is inconsistent with the declared scanline width."""


class NonFiniteSample(TmqiError):
    """Sample is NaN, infinite, or negative where nonnegative is required."""


class MaxvalUnsupported(TmqiError):
    """PPM maxval other than 255."""


class BitDepthUnsupported(TmqiError):
    """PNG with more than 8 bits per channel."""


class ManifestInvalid(TmqiError):
    """Dataset manifest violates its schema or invariants."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


# --- evaluation -------------------------------------------------------------

class LengthMismatch(TmqiError):
    """Rank-correlation inputs have different lengths."""


class TooFewItems(TmqiError):
    """Rank correlation needs at least two items."""


class EvalFailure(TmqiError):
    """A dataset set could not be evaluated; carries set id and file path."""

    def __init__(self, set_id, path, cause):
        self.set_id = set_id
        self.path = path
        self.cause = cause
        super().__init__(f"set {set_id}: {path}: {cause}")
