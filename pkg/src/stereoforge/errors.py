"""Exception types raised across the package.

Everything derives from StereoForgeError so callers can catch broadly.
"""


class StereoForgeError(Exception):
    """Base class for all errors raised by stereoforge."""


class MalformedHeader(StereoForgeError):
    """PFM header has wrong magic, bad dimensions, or a zero scale token."""


class TruncatedPayload(StereoForgeError):
    """Binary payload is shorter than the header promises."""


class UnsupportedBitDepth(StereoForgeError):
    """PNG disparity file is not 16-bit single-channel grayscale."""


class MalformedPng(StereoForgeError):
    """Bytes are not a decodable PNG stream."""


class UnsupportedFormat(StereoForgeError):
    """Image format outside the supported set (PNG, JPEG decode-only)."""


class NoValidPixels(StereoForgeError):
    """Operation needs at least one valid sample and found none."""


class DimensionMismatch(StereoForgeError):
    """Two rasters that must share a shape do not."""


class UnfilledHoles(StereoForgeError):
    """Sample assembly was asked to skip filling but holes remain."""


class EmptyPool(StereoForgeError):
    """Random-texture fill configured with an empty background pool."""


class AllHoles(StereoForgeError):
    """Background-extend fill has no source pixel anywhere in the image."""


class ExternalFailure(StereoForgeError):
    """External fill command failed or produced no usable output."""


class ImageTooSmall(StereoForgeError):
    """Input smaller than the operation's minimum size (census window, crop)."""


class NoOverlap(StereoForgeError):
    """Prediction and ground truth share no mutually valid pixel."""


class ArityMismatch(StereoForgeError):
    """A four-benchmark mean was given the wrong number of values."""


class MissingMetric(StereoForgeError):
    """Ranking input lacks one of the required benchmark values."""


class KOutOfRange(StereoForgeError):
    """Mixture size k outside [1, number of ranked datasets]."""
