"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the three branches
(input data, configuration, numerics) separate.
"""


class LitterTrackError(Exception):
    """Base class for all errors raised by this package."""


class DataError(LitterTrackError, ValueError):
    """Invalid input data: malformed files, bad vectors, invalid boxes."""


class DegenerateBoxError(DataError):
    """A geometric operation would produce a box with non-positive size."""


class SequencingError(DataError):
    """Frames were fed to a stateful consumer out of order."""


class ConfigError(LitterTrackError, ValueError):
    """Inconsistent or unparsable configuration."""


class NumericsError(LitterTrackError, RuntimeError):
    """A numerical routine failed beyond recovery (singular matrix, etc.)."""


class UndefinedMetricError(LitterTrackError):
    """A metric is undefined for the given data (e.g. empty ground truth)."""
