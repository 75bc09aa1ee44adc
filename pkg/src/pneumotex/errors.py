"""Exception types raised across the package.

Everything derives from PneumotexError so callers can catch broadly; most
types also subclass ValueError because they signal bad inputs.
"""


class PneumotexError(Exception):
    """Base class for all package errors."""


class ImageFormatError(PneumotexError, ValueError):
    """File is not a decodable PNG/JPEG or has an unsupported pixel layout."""


class ImageDimensionError(PneumotexError, ValueError):
    """Image smaller than the 3x3 minimum, or malformed pixel grid."""


class BoundsError(PneumotexError, ValueError):
    """Requested coordinates fall outside the image."""


class ParameterError(PneumotexError, ValueError):
    """Invalid parameter value for an operation."""


class SchemaError(PneumotexError, ValueError):
    """Malformed taxonomy, manifest, config or results document."""


class CacheIntegrityError(PneumotexError, ValueError):
    """Feature cache file disagrees with its own header or the descriptor."""


class AlignmentError(PneumotexError, ValueError):
    """Feature matrices do not share an identical sample set and order."""


class ExtractionError(PneumotexError, RuntimeError):
    """One or more samples failed feature extraction.

    failures holds (sample_id, message) pairs for every failed sample.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        lines = ", ".join(f"{sid}: {msg}" for sid, msg in self.failures)
        super().__init__(f"{len(self.failures)} sample(s) failed extraction: {lines}")


class ResamplingError(PneumotexError, ValueError):
    """Resampling cannot proceed (class too small, degenerate density, ...)."""


class DegenerateDensityError(ResamplingError):
    """ADASYN found no minority point with majority-class neighbours."""


class StratificationError(PneumotexError, ValueError):
    """Stratified holdout impossible (e.g. a label with one sample)."""


class ConvergenceError(PneumotexError, RuntimeError):
    """Iterative solver failed to converge; carries diagnostics."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = dict(diagnostics)
        if diagnostics:
            detail = ", ".join(f"{k}={v}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


class TrainingError(PneumotexError, RuntimeError):
    """Training diverged (NaN/inf loss)."""

    def __init__(self, message, epoch=None):
        self.epoch = epoch
        if epoch is not None:
            message = f"{message} at epoch {epoch}"
        super().__init__(message)


class SelectionError(PneumotexError, ValueError):
    """Fusion scenario selection asked for more than the results contain."""


class UsageError(PneumotexError, ValueError):
    """Bad command-line invocation."""
