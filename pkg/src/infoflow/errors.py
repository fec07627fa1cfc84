"""Exception hierarchy. The CLI maps these onto exit codes 2/3/4."""


class InfoflowError(Exception):
    """Base class for all infoflow errors."""


class UsageError(InfoflowError):
    """Invalid arguments or options (CLI exit code 2)."""


class DataError(InfoflowError):
    """Problems with input data files or their contents (CLI exit code 3)."""


class CsvParseError(DataError):
    """A cell could not be parsed as a number."""


class CsvFormatError(DataError):
    """Structurally broken CSV: ragged rows, non-uniform time column, ..."""


class ValidationError(DataError):
    """Data violates a panel invariant (NaN/Inf cells, duplicate labels, ...)."""


class InsufficientDataError(DataError):
    """Too few samples for the requested operation."""


class InvalidStrideError(UsageError):
    """Differencing stride k out of range."""


class InvalidPairError(UsageError):
    """Source and target must differ for directed flow estimation."""


class InvalidTransformError(UsageError):
    """A component transform matrix is singular or badly shaped."""


class ResolutionError(UsageError):
    """Too few surrogates for a meaningful p value (need >= 19)."""


class NumericalError(InfoflowError):
    """Numerical failure in an estimator or solver (CLI exit code 4)."""


class SingularCovarianceError(NumericalError):
    """Sample covariance matrix is singular or numerically near-singular."""


class DegenerateNormalizerError(NumericalError):
    """All contributions to the flow normalizer are zero."""


class DegenerateComponentError(NumericalError):
    """A component has zero stationary variance."""


class NonStationaryError(NumericalError):
    """Drift matrix is not Hurwitz: no stationary distribution exists."""


class InstabilityError(NumericalError):
    """Simulated trajectory exploded; a smaller time step may help."""


class ConditioningWarning(UserWarning):
    """A linear solve was close to singular; results may lose accuracy."""


class DegenerateInferenceWarning(UserWarning):
    """Perfect model fit: standard errors collapse to zero."""
