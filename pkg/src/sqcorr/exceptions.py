"""Exception hierarchy. Each maps to a CLI exit code (see cli.EXIT_CODES)."""


class SqcorrError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SqcorrError):
    """A physical or configuration parameter is out of its allowed range."""


class TruncationError(SqcorrError):
    """Number-basis truncation failed to stabilize below the dimension ceiling."""


class DegenerateStateError(SqcorrError):
    """Correlations are undefined for this state (e.g. vacuum, mean photon 0)."""


class DataFormatError(SqcorrError):
    """A tag file or dataset does not conform to the declared format."""


class EmptyChannelError(DataFormatError):
    """A requested detector channel contains no tags."""


class InsufficientSatellitesError(SqcorrError):
    """Too few usable satellite peaks to normalize a correlation histogram."""


class PoorNormalizationError(SqcorrError):
    """Satellite-peak coefficient of variation exceeds the configured limit."""


class DegenerateFitError(SqcorrError):
    """A regression target is underdetermined (too few or collinear points)."""


class NoConvergenceError(SqcorrError):
    """Every optimizer start exhausted its evaluation budget."""
