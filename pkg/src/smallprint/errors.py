"""Exception types shared across the package."""


class SmallprintError(Exception):
    """Base class for all package errors."""


class ParameterError(SmallprintError, ValueError):
    """An argument violates a documented precondition."""


class SamplingError(SmallprintError):
    """A sub-pixel sample was requested outside the image."""


class DegenerateInputError(SmallprintError):
    """The input carries no usable signal (e.g. a constant image)."""


class ExtractionError(SmallprintError):
    """A patch or descriptor footprint does not fit the image."""


class DegenerateDescriptorError(SmallprintError):
    """A descriptor window has no contrast to normalize."""


class InsufficientDataError(SmallprintError):
    """Too few correspondences for a model fit."""


class SegmentationError(SmallprintError):
    """Foreground segmentation failed."""


class DatasetError(SmallprintError):
    """A dataset directory or file cannot be ingested."""


class ParseError(SmallprintError):
    """A CSV or config document is malformed."""
