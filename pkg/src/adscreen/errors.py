"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
NumericError -> 3.
"""


class AdscreenError(Exception):
    pass


class UsageError(AdscreenError, ValueError):
    """Bad flag, config value, or out-of-range parameter."""


class DataError(AdscreenError, ValueError):
    """Unreadable, malformed, or schema-violating input data."""


class NumericError(AdscreenError, ArithmeticError):
    """Training divergence or non-finite numerical state."""


class MetricUndefined(AdscreenError, ArithmeticError):
    """A metric's value does not exist for the given input.

    Raised for singularities (e.g. all words hapax) and for inputs shorter
    than a metric's minimum length. Batch feature extraction catches this
    and records an explicit missing marker instead of aborting.
    """
