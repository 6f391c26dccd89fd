"""Exception and warning types shared across the package."""


class SimvibError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SimvibError, ValueError):
    """An argument violates an operation's precondition."""


class CalibrationError(SimvibError, ValueError):
    """Noise power cannot be calibrated (zero-power signal)."""


class InvalidDepthError(SimvibError, ValueError):
    """Signal too short for the requested decomposition depth."""


class CorruptTreeError(SimvibError, ValueError):
    """Wavelet packet tree violates its structural invariants."""


class UndefinedSimilarityError(SimvibError, ValueError):
    """Similarity is undefined for the given inputs (e.g. zero vector)."""


class IncompleteLibraryError(SimvibError, ValueError):
    """Reference library is missing one or more classes."""


class ManifestError(SimvibError, ValueError):
    """Dataset manifest failed to load or validate."""


class SplitError(SimvibError, ValueError):
    """Reference/test split cannot be satisfied."""


class ReportError(SimvibError, RuntimeError):
    """Report emission failed (IO or missing data)."""


class DegenerateInputWarning(UserWarning):
    """A degenerate input triggered a documented fallback, not an error."""
