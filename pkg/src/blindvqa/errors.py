"""Exception types shared across the library.

All library-raised errors derive from BlindVqaError so the service layer can
map them to HTTP responses in one place.
"""


class BlindVqaError(Exception):
    """Base class for all library errors."""


class EmptyInputError(BlindVqaError, ValueError):
    """An operation received an empty frame list / sample list."""


class FrameShapeError(BlindVqaError, ValueError):
    """A frame has the wrong number of channels or is too small."""


class DegenerateEmbeddingError(BlindVqaError, ValueError):
    """An embedding has zero norm or mismatched dimension."""


class DegenerateFitError(BlindVqaError, ValueError):
    """Distribution fit is undefined (zero variance or one-sided samples)."""


class DegenerateFrameError(BlindVqaError, ValueError):
    """No patch of the frame passed the sharpness selection."""


class DegenerateStatsError(BlindVqaError, ValueError):
    """Corpus statistics have zero spread; normalization is undefined."""


class CorpusTooSmallError(BlindVqaError, ValueError):
    """Not enough images/videos to fit a model or compute statistics."""


class UndefinedCorrelationError(BlindVqaError, ValueError):
    """Correlation requested on constant or mismatched inputs."""


class InsufficientDataError(BlindVqaError, ValueError):
    """Fewer than two scored entries; no correlation can be reported."""


class ModelFileError(BlindVqaError, ValueError):
    """A model/stats/fixture file failed validation on load."""
