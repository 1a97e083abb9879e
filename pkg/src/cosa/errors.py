"""Exception types raised by the cosa package."""


class CosaError(ValueError):
    """Base class for all input/data errors raised by this package."""


class DataError(CosaError):
    """Malformed input data (non-finite values, bad codes, parse failures)."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"column {col}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ZeroDispersion(CosaError):
    def __init__(self, k):
        self.k = k
        super().__init__(f"attribute {k} has zero dispersion")


class LengthMismatch(CosaError):
    pass


class SizeMismatch(CosaError):
    pass


class AllZeroWeights(CosaError):
    pass


class AllZero(CosaError):
    pass


class InvalidK(CosaError):
    pass


class DegenerateRank(CosaError):
    pass


class GroupTooSmall(CosaError):
    pass


class RangeTooLarge(CosaError):
    pass


class DimensionTooSmall(CosaError):
    pass
