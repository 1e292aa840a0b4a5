"""Daily price panels, alignment on common trading days, and log returns.

Prices are stored as 64-bit floats; dates are plain :class:`datetime.date`
objects at daily frequency (no timezone). Missing values are never
interpolated: multi-source panels are aligned by dropping non-common days.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateDate,
    EmptyIntersection,
    MissingColumn,
    NonNumericCell,
    NonPositivePrice,
    UnparseableDate,
)

__all__ = [
    "PriceFrame",
    "ReturnSeries",
    "CrisisWindow",
    "load_prices",
    "align_common_days",
    "log_returns",
]

_DATE_FORMATS = {"iso": "%Y-%m-%d", "dmy": "%d/%m/%Y"}


@dataclass(frozen=True)
class PriceFrame:
    """Date-aligned panel of daily price levels, one column per asset."""

    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    values: np.ndarray  # shape (T, k), float64

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if values.shape != (len(self.dates), len(self.assets)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("price values must be finite")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise DuplicateDate(b) if a == b else ValueError(
                    f"dates not strictly increasing at {b}"
                )
        object.__setattr__(self, "values", values)

    @property
    def n_obs(self) -> int:
        return len(self.dates)

    def column(self, asset: str) -> np.ndarray:
        try:
            j = self.assets.index(asset)
        except ValueError:
            raise MissingColumn(asset) from None
        return self.values[:, j]

    def select(self, assets: Sequence[str]) -> "PriceFrame":
        cols = [self.assets.index(a) if a in self.assets else -1 for a in assets]
        for a, j in zip(assets, cols):
            if j < 0:
                raise MissingColumn(a)
        return PriceFrame(self.dates, tuple(assets), self.values[:, cols])


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log returns; one row shorter than the source price panel."""

    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    values: np.ndarray  # shape (T-1, k)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.dates), len(self.assets)):
            raise ValueError("values shape does not match dates/assets")
        if not np.all(np.isfinite(values)):
            raise ValueError("return values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n_obs(self) -> int:
        return len(self.dates)

    def column(self, asset: str) -> np.ndarray:
        try:
            j = self.assets.index(asset)
        except ValueError:
            raise MissingColumn(asset) from None
        return self.values[:, j]


@dataclass(frozen=True)
class CrisisWindow:
    """Labelled date window used for sub-period correlation summaries."""

    label: str
    start: dt.date
    end: dt.date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"window {self.label!r}: start {self.start} after end {self.end}")

    def mask(self, dates: Sequence[dt.date]) -> np.ndarray:
        return np.array([self.start <= d <= self.end for d in dates], dtype=bool)


def _parse_date(text: str, row: int, column: str, date_format: str) -> dt.date:
    fmt = _DATE_FORMATS.get(date_format, date_format)
    try:
        return dt.datetime.strptime(text.strip(), fmt).date()
    except ValueError:
        raise UnparseableDate(text, row, column) from None


def load_prices(
    source,
    date_column: str = "date",
    asset_columns: Optional[Sequence[str]] = None,
    date_format: str = "iso",
    delimiter: str = ",",
) -> PriceFrame:
    """Read a delimited text file of daily price levels into a PriceFrame.

    The file must have a header row; ``date_column`` names the date column and
    ``asset_columns`` (default: every other column) the numeric price columns.
    ``date_format`` is ``"iso"`` (YYYY-MM-DD), ``"dmy"`` (DD/MM/YYYY) or an
    explicit strptime pattern. Rows are sorted by date; duplicate dates and
    non-numeric cells are rejected with the offending row/column.
    """
    with open(source, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(date_column, str(source)) from None
        header = [h.strip() for h in header]
        if date_column not in header:
            raise MissingColumn(date_column, str(source))
        if asset_columns is None:
            asset_columns = [h for h in header if h != date_column]
        for col in asset_columns:
            if col not in header:
                raise MissingColumn(col, str(source))
        date_idx = header.index(date_column)
        asset_idx = [header.index(c) for c in asset_columns]

        rows: list[tuple[dt.date, list[float]]] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            raw_date = row[date_idx] if date_idx < len(row) else ""
            date = _parse_date(raw_date, row_no, date_column, date_format)
            cells = []
            for col, j in zip(asset_columns, asset_idx):
                raw = row[j].strip() if j < len(row) else ""
                try:
                    value = float(raw)
                except ValueError:
                    raise NonNumericCell(raw, row_no, col) from None
                if not math.isfinite(value):
                    raise NonNumericCell(raw, row_no, col)
                cells.append(value)
            rows.append((date, cells))

    rows.sort(key=lambda r: r[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DuplicateDate(d1)
    dates = tuple(d for d, _ in rows)
    values = np.array([c for _, c in rows], dtype=float).reshape(len(rows), len(asset_columns))
    return PriceFrame(dates, tuple(asset_columns), values)


def align_common_days(frames: Sequence[PriceFrame]) -> PriceFrame:
    """Join panels on the intersection of their trading days.

    Asset names must be disjoint across frames; the result carries all assets
    over the sorted common dates. Raises EmptyIntersection when no date is
    shared by every frame.
    """
    if not frames:
        raise ValueError("need at least one frame")
    seen: set[str] = set()
    for frame in frames:
        overlap = seen.intersection(frame.assets)
        if overlap:
            raise ValueError(f"duplicate asset names across frames: {sorted(overlap)}")
        seen.update(frame.assets)

    common = set(frames[0].dates)
    for frame in frames[1:]:
        common &= set(frame.dates)
    if not common:
        raise EmptyIntersection("no common trading days across the input frames")
    dates = tuple(sorted(common))

    blocks = []
    for frame in frames:
        index = {d: i for i, d in enumerate(frame.dates)}
        rows = [index[d] for d in dates]
        blocks.append(frame.values[rows, :])
    assets = tuple(a for frame in frames for a in frame.assets)
    return PriceFrame(dates, assets, np.hstack(blocks))


def log_returns(frame: PriceFrame) -> ReturnSeries:
    """Daily log returns ln(P_t+1) - ln(P_t); row t is stamped with the later date."""
    values = frame.values
    nonpos = np.argwhere(values <= 0.0)
    if nonpos.size:
        t, j = nonpos[0]
        raise NonPositivePrice(frame.assets[j], frame.dates[t])
    returns = np.diff(np.log(values), axis=0)
    return ReturnSeries(frame.dates[1:], frame.assets, returns)
