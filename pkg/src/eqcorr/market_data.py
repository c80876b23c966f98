"""Price panels, gross percent returns, calendar resampling, window slicing.

Prices arrive as a CSV with a ``date`` column (ISO-8601, one row per trading
day) followed by one column per ticker.  Returns throughout the package are
gross percent returns: 100 times today's close over the previous close, so a
flat day is 100.0 and a 1% gain is 101.0.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import (
    DataError,
    EmptyUniverseError,
    InsufficientDataError,
    WindowError,
)

FREQUENCIES = ("daily", "weekly", "monthly")


def _as_date_array(dates) -> np.ndarray:
    arr = np.asarray(dates, dtype="datetime64[D]")
    if arr.ndim != 1:
        raise DataError("dates must be one-dimensional")
    return arr


@dataclass(frozen=True)
class PricePanel:
    """Aligned close prices: one row per trading day, one column per ticker."""

    dates: np.ndarray
    tickers: tuple[str, ...]
    close: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _as_date_array(self.dates))
        close = np.asarray(self.close, dtype=np.float64)
        object.__setattr__(self, "close", close)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        if close.ndim != 2 or close.shape != (len(self.dates), len(self.tickers)):
            raise DataError("close matrix shape does not match dates/tickers")
        if len(self.tickers) == 0:
            raise EmptyUniverseError("price panel has no tickers")
        if len(self.dates) == 0:
            raise DataError("price panel has no rows")
        if len(np.unique(self.dates)) != len(self.dates):
            raise DataError("duplicate dates in price panel")
        if np.any(np.diff(self.dates).astype(int) <= 0):
            raise DataError("dates must be strictly increasing")
        if not np.all(np.isfinite(close)):
            raise DataError("non-finite price in panel")
        if np.any(close <= 0.0):
            i, j = map(int, np.argwhere(close <= 0.0)[0])
            raise DataError(
                f"non-positive price at date {self.dates[i]} ticker {self.tickers[j]}"
            )

    @property
    def n_days(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnsPanel:
    """Gross percent returns at a fixed frequency."""

    dates: np.ndarray
    tickers: tuple[str, ...]
    returns: np.ndarray
    frequency: str = "daily"

    def __post_init__(self):
        object.__setattr__(self, "dates", _as_date_array(self.dates))
        rets = np.asarray(self.returns, dtype=np.float64)
        object.__setattr__(self, "returns", rets)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        if self.frequency not in FREQUENCIES:
            raise DataError(f"unknown frequency {self.frequency!r}")
        if rets.ndim != 2 or rets.shape != (len(self.dates), len(self.tickers)):
            raise DataError("returns matrix shape does not match dates/tickers")
        if np.any(np.diff(self.dates).astype(int) <= 0):
            raise DataError("dates must be strictly increasing")
        if not np.all(np.isfinite(rets)) or np.any(rets <= 0.0):
            raise DataError("gross returns must be finite and positive")

    @property
    def n_periods(self) -> int:
        return len(self.dates)

    def column(self, ticker: str) -> np.ndarray:
        return self.returns[:, self.tickers.index(ticker)]

    def take_tickers(self, tickers) -> "ReturnsPanel":
        idx = [self.tickers.index(t) for t in tickers]
        return ReturnsPanel(
            self.dates, tuple(tickers), self.returns[:, idx], self.frequency
        )


@dataclass(frozen=True)
class WindowSpec:
    """Walk-forward window: consecutive training months, one test month."""

    train_months: int
    test_months: int = 1

    def __post_init__(self):
        if self.train_months < 1:
            raise WindowError("train_months must be >= 1")
        if self.test_months != 1:
            raise WindowError("test_months is fixed at 1")


def load_prices(path, date_range=None) -> tuple[PricePanel, tuple[str, ...]]:
    """Parse a close-price CSV into a validated panel.

    Tickers with any missing price inside the requested range are dropped and
    returned as the second element, so one sparse column never shrinks the
    usable history of the rest.
    """
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except Exception as exc:
        raise DataError(f"cannot parse CSV {path}: {exc}") from None
    if raw.shape[1] < 2:
        raise DataError("expected a date column plus at least one ticker column")
    first = str(raw.columns[0]).strip().lower()
    if first != "date":
        raise DataError(f"first column must be 'date', got {raw.columns[0]!r}")
    tickers = [str(c).strip() for c in raw.columns[1:]]
    if len(set(tickers)) != len(tickers):
        raise DataError("duplicate ticker columns")

    dates = []
    for row, text in enumerate(raw.iloc[:, 0]):
        try:
            dates.append(dt.date.fromisoformat(str(text).strip()))
        except (TypeError, ValueError):
            raise DataError(f"malformed date {text!r} at data row {row + 1}") from None
    date_arr = np.array(dates, dtype="datetime64[D]")

    # cell-by-cell float() so written prices round-trip to the exact bits
    values = np.empty((len(dates), len(tickers)), dtype=np.float64)
    for j, name in enumerate(tickers):
        for row, cell in enumerate(raw.iloc[:, j + 1]):
            text = "" if cell is None or cell is np.nan or isinstance(cell, float) else str(cell).strip()
            if text == "":
                values[row, j] = np.nan
                continue
            try:
                values[row, j] = float(text)
            except ValueError:
                raise DataError(
                    f"malformed price {cell!r} at data row {row + 1}, ticker {name}"
                ) from None

    order = np.argsort(date_arr, kind="stable")
    date_arr = date_arr[order]
    values = values[order]
    if len(np.unique(date_arr)) != len(date_arr):
        raise DataError("duplicate dates in price file")

    if date_range is not None:
        start, end = date_range
        start = np.datetime64(dt.date.fromisoformat(start) if isinstance(start, str) else start, "D")
        end = np.datetime64(dt.date.fromisoformat(end) if isinstance(end, str) else end, "D")
        keep = (date_arr >= start) & (date_arr <= end)
        date_arr = date_arr[keep]
        values = values[keep]
    if len(date_arr) == 0:
        raise DataError("no rows in the requested date range")

    has_missing = np.isnan(values).any(axis=0)
    dropped = tuple(sorted(t for t, m in zip(tickers, has_missing) if m))
    kept = [t for t, m in zip(tickers, has_missing) if not m]
    if not kept:
        raise EmptyUniverseError("every ticker has missing prices in range")
    values = values[:, ~has_missing]

    nonpos = values <= 0.0
    if nonpos.any():
        i, j = map(int, np.argwhere(nonpos)[0])
        raise DataError(
            f"non-positive price at date {date_arr[i]} ticker {kept[j]}"
        )
    return PricePanel(date_arr, tuple(kept), values), dropped


def write_prices_csv(panel: PricePanel, path) -> None:
    """Serialize a panel back to the canonical CSV layout (round-trip safe)."""
    with open(path, "w", newline="") as fh:
        fh.write("date," + ",".join(panel.tickers) + "\n")
        for i, date in enumerate(panel.dates):
            row = ",".join(repr(float(x)) for x in panel.close[i])
            fh.write(f"{date},{row}\n")


def to_gross_returns(panel: PricePanel) -> ReturnsPanel:
    """Daily gross percent returns: 100 * close_t / close_{t-1}."""
    if panel.n_days < 2:
        raise InsufficientDataError("need at least two price rows for returns")
    rets = 100.0 * panel.close[1:] / panel.close[:-1]
    return ReturnsPanel(panel.dates[1:], panel.tickers, rets, "daily")


def _python_dates(dates: np.ndarray) -> list[dt.date]:
    return list(dates.astype("datetime64[D]").astype(object))


def _period_key(date: dt.date, target: str) -> tuple[int, int]:
    if target == "weekly":
        iso = date.isocalendar()
        return (iso[0], iso[1])
    return (date.year, date.month)


def resample(returns: ReturnsPanel, target: str) -> ReturnsPanel:
    """Compound daily gross returns into ISO-week or calendar-month returns.

    Partial periods at the boundaries of the sample are kept; each output row
    is stamped with the last trading date of its period.
    """
    if target not in ("weekly", "monthly"):
        raise DataError(f"resample target must be weekly or monthly, got {target!r}")
    if returns.frequency != "daily":
        raise DataError("resample expects a daily returns panel")
    pydates = _python_dates(returns.dates)
    keys = [_period_key(d, target) for d in pydates]
    out_dates: list[dt.date] = []
    out_rows: list[np.ndarray] = []
    start = 0
    for i in range(1, len(keys) + 1):
        if i == len(keys) or keys[i] != keys[start]:
            block = returns.returns[start:i]
            out_rows.append(100.0 * np.prod(block / 100.0, axis=0))
            out_dates.append(pydates[i - 1])
            start = i
    return ReturnsPanel(
        np.array(out_dates, dtype="datetime64[D]"),
        returns.tickers,
        np.vstack(out_rows),
        target,
    )


def add_months(month: tuple[int, int], delta: int) -> tuple[int, int]:
    """Shift a (year, month) pair by a signed number of calendar months."""
    y, m = month
    idx = y * 12 + (m - 1) + delta
    return idx // 12, idx % 12 + 1


def month_range(first: tuple[int, int], count: int) -> list[tuple[int, int]]:
    return [add_months(first, k) for k in range(count)]


def slice_months(returns: ReturnsPanel, months) -> ReturnsPanel:
    """Rows of a daily panel falling in the given (year, month) pairs.

    Every requested month must be present in the data or a
    :class:`WindowError` is raised naming what is missing.
    """
    if returns.frequency != "daily":
        raise DataError("slice_months expects a daily returns panel")
    wanted = list(months)
    pydates = _python_dates(returns.dates)
    keys = np.array([d.year * 12 + (d.month - 1) for d in pydates])
    present = set(keys.tolist())
    missing = [ym for ym in wanted if ym[0] * 12 + (ym[1] - 1) not in present]
    if missing:
        names = ", ".join(f"{y:04d}-{m:02d}" for y, m in missing)
        raise WindowError(f"data does not cover required months: {names}")
    rows = np.isin(keys, sorted({y * 12 + (m - 1) for y, m in wanted}))
    return ReturnsPanel(
        returns.dates[rows], returns.tickers, returns.returns[rows], "daily"
    )


def slice_window(
    returns: ReturnsPanel, window: WindowSpec, month: tuple[int, int]
) -> tuple[ReturnsPanel, ReturnsPanel]:
    """Split a daily panel into the training months before `month` and `month`.

    The training slice covers exactly ``window.train_months`` calendar months
    immediately preceding the test month; both slices must be present in the
    data or a :class:`WindowError` is raised naming what is missing.
    """
    train_months = month_range(add_months(month, -window.train_months), window.train_months)
    train = slice_months(returns, train_months)
    test = slice_months(returns, [month])
    return train, test


def covered_months(returns: ReturnsPanel) -> set[tuple[int, int]]:
    """Set of calendar months with at least one row in the panel."""
    return {(d.year, d.month) for d in _python_dates(returns.dates)}
