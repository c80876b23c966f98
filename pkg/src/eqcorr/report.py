"""Performance analytics and the cross-model summary table.

All statistics work on gross percent return series (flat day = 100.0).  The
standard deviation convention is 1/N throughout, matching the covariance
estimators.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import _kernels
from .errors import DataError, DegenerateColumnWarning

ANNUALIZATION = {"daily": 252.0, "weekly": 52.0, "monthly": 12.0}


def sharpe(gross: np.ndarray, frequency: str) -> float:
    """Annualized Sharpe ratio of a gross-return series.

    sqrt(periods/year) * mean(net) / std(net); undefined (NaN, with a warning)
    for fewer than two observations or a zero-dispersion series.
    """
    if frequency not in ANNUALIZATION:
        raise DataError(f"unknown frequency {frequency!r}")
    x = np.asarray(gross, dtype=np.float64) - 100.0
    if x.size < 2 or x.std() == 0.0:
        warnings.warn(
            f"sharpe undefined for {frequency} series (n={x.size})",
            DegenerateColumnWarning,
            stacklevel=2,
        )
        return float("nan")
    return float(math.sqrt(ANNUALIZATION[frequency]) * x.mean() / x.std())


def expected_shortfall(gross: np.ndarray) -> float:
    """Mean of the negative net returns; zero when there are none."""
    x = np.asarray(gross, dtype=np.float64) - 100.0
    neg = x[x < 0.0]
    return float(neg.mean()) if neg.size else 0.0


def drawdown_series(daily_gross: np.ndarray) -> np.ndarray:
    """Percent drawdown of the cumulated path; starts at 0, never positive."""
    g = np.asarray(daily_gross, dtype=np.float64)
    if g.size == 0:
        raise DataError("drawdown needs a non-empty series")
    return _kernels.drawdown_core(g)


def mean_leverage(weights: list[np.ndarray]) -> float:
    """Average L1 norm of the held portfolios."""
    if not weights:
        raise DataError("mean_leverage needs at least one weight vector")
    return float(np.mean([np.abs(np.asarray(w)).sum() for w in weights]))


@dataclass(frozen=True)
class MetricsRow:
    """One summary-table row; column names mirror the report CSV header."""

    model: str
    mean_monthly_return_pct: float
    monthly_return_std_pct: float
    monthly_es: float
    mean_leverage: float
    mean_daily_drawdown_pct: float
    sharpe_daily: float
    sharpe_weekly: float
    sharpe_monthly: float


REPORT_COLUMNS = (
    "Model",
    "Mean Monthly Return(%)",
    "Monthly Return Std(%)",
    "Monthly ES",
    "Mean Leverage",
    "Mean Daily Drawdown(%)",
    "Sharpe Daily",
    "Sharpe Weekly",
    "Sharpe Monthly",
)


def metrics_row(name: str, ledger) -> MetricsRow:
    """Summarize one backtest ledger (annualization: x12 mean, sqrt(12) std)."""
    monthly_net = ledger.monthly.returns[:, 0] - 100.0
    return MetricsRow(
        model=name,
        mean_monthly_return_pct=float(12.0 * monthly_net.mean()),
        monthly_return_std_pct=float(math.sqrt(12.0) * monthly_net.std()),
        monthly_es=expected_shortfall(ledger.monthly.returns[:, 0]),
        mean_leverage=mean_leverage([r.weights for r in ledger.records]),
        mean_daily_drawdown_pct=float(
            drawdown_series(ledger.daily.returns[:, 0]).mean()
        ),
        sharpe_daily=sharpe(ledger.daily.returns[:, 0], "daily"),
        sharpe_weekly=sharpe(ledger.weekly.returns[:, 0], "weekly"),
        sharpe_monthly=sharpe(ledger.monthly.returns[:, 0], "monthly"),
    )


def report(ledgers: dict) -> list[MetricsRow]:
    """MetricsRows for every ledger, sorted by model name."""
    return [metrics_row(name, ledgers[name]) for name in sorted(ledgers)]


def write_report_csv(rows: list[MetricsRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for row in rows:
            cells = [row.model] + [
                repr(float(getattr(row, f.name)))
                for f in fields(MetricsRow)
                if f.name != "model"
            ]
            fh.write(",".join(cells) + "\n")


def format_report_table(rows: list[MetricsRow]) -> str:
    """Fixed-width text rendering of the summary table."""
    cells = [list(REPORT_COLUMNS)]
    for row in rows:
        cells.append(
            [row.model]
            + [
                f"{getattr(row, f.name):.4f}"
                for f in fields(MetricsRow)
                if f.name != "model"
            ]
        )
    widths = [max(len(line[i]) for line in cells) for i in range(len(REPORT_COLUMNS))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in cells]
    return "\n".join(lines)
