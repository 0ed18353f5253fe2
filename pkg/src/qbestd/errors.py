"""Exception hierarchy shared across the package.

Two broad classes matter to callers (and to the CLI exit-code mapping):
input problems (unreadable or malformed files, bad parameter values) and
data-contract violations between otherwise valid inputs (dimension
mismatches, a query longer than its reference).
"""


class QbestdError(Exception):
    """Base class for all package-specific errors."""


class InputDataError(QbestdError):
    """An input file or value is missing, malformed, or unsupported."""


class DataContractError(QbestdError):
    """Valid inputs that cannot legally be combined."""


class DimensionMismatchError(DataContractError):
    """Feature dimensionalities of two matrices disagree."""


class QueryLongerThanReferenceError(DataContractError):
    """The query has more frames than the reference it is searched in."""
