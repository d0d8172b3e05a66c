"""Exception types shared across the toolkit."""


class TmclinError(Exception):
    """Base class for all tmclin errors."""


class SchemaError(TmclinError):
    """Invalid feature schema, or a value that does not conform to it."""


class DataError(TmclinError):
    """Malformed dataset, record, or prediction/label arrays."""


class NotTrainedError(TmclinError):
    """Operation requires a trained model."""


class FingerprintMismatchError(TmclinError):
    """Model was trained under a different schema than the one supplied."""


class CohortError(TmclinError):
    """Synthetic cohort generation could not satisfy its configuration."""
