"""Exception types raised across the volspill library.

Every error carries enough context (row, column, asset, date, stage) to be
actionable from a CLI run without a debugger.
"""

from __future__ import annotations


class VolspillError(Exception):
    """Base class for all volspill errors."""


# -- data loading / alignment -------------------------------------------------

class MissingColumn(VolspillError):
    def __init__(self, column: str, source: str = "") -> None:
        where = f" in {source}" if source else ""
        super().__init__(f"column {column!r} not found{where}")
        self.column = column


class UnparseableDate(VolspillError):
    def __init__(self, value: str, row: int, column: str) -> None:
        super().__init__(f"cannot parse date {value!r} at row {row}, column {column!r}")
        self.value, self.row, self.column = value, row, column


class NonNumericCell(VolspillError):
    def __init__(self, value: str, row: int, column: str) -> None:
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column!r}")
        self.value, self.row, self.column = value, row, column


class DuplicateDate(VolspillError):
    def __init__(self, date) -> None:
        super().__init__(f"duplicate date {date}")
        self.date = date


class EmptyIntersection(VolspillError):
    """No common trading days remain after alignment."""


class NonPositivePrice(VolspillError):
    def __init__(self, asset: str, date) -> None:
        super().__init__(f"non-positive price for {asset!r} on {date}")
        self.asset, self.date = asset, date


# -- statistics ---------------------------------------------------------------

class TooFewObservations(VolspillError):
    pass


class ZeroVariance(VolspillError):
    pass


class TooManyLags(VolspillError):
    pass


class SingularRegression(VolspillError):
    pass


class SampleTooShort(VolspillError):
    pass


# -- estimation ---------------------------------------------------------------

class SingularDesign(VolspillError):
    pass


class NonInvertibleMA(VolspillError):
    pass


class NonConvergence(VolspillError):
    """Optimizer failed to converge; carries the best fit found so far."""

    def __init__(self, message: str, best=None, status: str = "") -> None:
        super().__init__(message)
        self.best = best
        self.status = status


class InvalidParams(VolspillError):
    pass


class NonPositiveDefiniteR(VolspillError):
    def __init__(self, t: int) -> None:
        super().__init__(f"correlation matrix not positive definite at t={t}")
        self.t = t


class InterceptNotPSD(VolspillError):
    """Correlation-model intercept infeasible for every parameter trial."""


class EmptyWindow(VolspillError):
    def __init__(self, label: str) -> None:
        super().__init__(f"window {label!r} contains no sample dates")
        self.label = label


# -- simulation / energy / config ----------------------------------------------

class InvalidDgp(VolspillError):
    pass


class DegenerateDenominator(VolspillError):
    """Switch-price denominator vanished (equal emission/efficiency ratios)."""


class ConfigError(VolspillError):
    pass
