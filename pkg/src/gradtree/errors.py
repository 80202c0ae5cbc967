"""Exception types shared across the package."""


class GradTreeError(Exception):
    """Base class for package-specific errors."""


class CsvFormatError(GradTreeError):
    """A CSV file could not be parsed into a dataset.

    Messages name the offending row and column where applicable.
    """


class ModelFormatError(GradTreeError):
    """A model file is not valid or belongs to an unsupported format version."""


class UndefinedMetricError(GradTreeError):
    """A metric is undefined for the given inputs (e.g. constant targets)."""


class NumericalError(GradTreeError):
    """An internal numerical guarantee was violated (should not happen)."""
