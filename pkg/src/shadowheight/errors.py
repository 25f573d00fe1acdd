"""Domain error types shared across the toolkit."""


class ShadowHeightError(Exception):
    """Base class for all domain errors raised by this package."""


class SunBelowHorizon(ShadowHeightError):
    """Solar elevation <= 0 deg: shadow geometry is undefined."""


class SunAtZenith(ShadowHeightError):
    """Solar elevation >= 90 deg: no shadow is cast, height unrecoverable."""


class PolarNight(ShadowHeightError):
    """No daylight window exists for the requested location and date."""


class EmptyInput(ShadowHeightError):
    """An operation requiring at least one element received none."""


class LengthMismatch(ShadowHeightError):
    """Paired sequences have different lengths."""


class NonPositiveFloors(ShadowHeightError):
    """Floor counts must be >= 1."""


class DegenerateCrop(ShadowHeightError):
    """Bounding-box crop is smaller than 2x2 pixels."""


class ShapeMismatch(ShadowHeightError):
    """An image patch or array does not have the required shape."""


class MissingFields(ShadowHeightError):
    """A record lacks fields required by the requested operation."""


class EmptyDataset(ShadowHeightError):
    """Training requires a non-empty dataset."""


class DivergenceDetected(ShadowHeightError):
    """Training loss became non-finite; carries the partial report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ModelFormatError(ShadowHeightError):
    """A serialized model file is unreadable or incompatible."""


class UnknownImage(ShadowHeightError):
    """No image with the requested id exists in the data directory."""


class MissingLabels(ShadowHeightError):
    """An image exists but its bounding-box label file does not."""


class SessionClosed(ShadowHeightError):
    """The referenced annotation session does not exist (or was closed)."""


class OutOfBoundsEndpoints(ShadowHeightError):
    """Annotated shadow endpoints fall outside the image bounds."""


class NoGroundTruth(ShadowHeightError):
    """Time refinement needs at least one annotation with a known height."""


class StoreLocked(ShadowHeightError):
    """Another writer already owns the annotation store."""
