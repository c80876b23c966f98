"""Hyperparameter selection on the year before each backtest year.

Each grid point solves the model once on the tuning year and scores the
resulting daily portfolio returns with

    value = -ES / Sharpe            (lower is better)

where ES is the mean negative net daily return (0 when there are none, giving
a perfect score) and Sharpe is the sqrt(252)-annualized ratio; a zero-spread
series or a non-positive Sharpe scores +inf, as does any grid point whose
solve fails.  The raw grid is smoothed with an 11-point mean filter (11x11
with the feasibility mask in two dimensions) before the argmin, so one lucky
spike cannot pick the hyperparameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EqcorrError, ModelSpecError, TuningError
from .models import ModelSpec

GRID_STEP_DEFAULT = 0.01
FILTER_WINDOW_DEFAULT = 11


def make_grid(step: float = GRID_STEP_DEFAULT) -> np.ndarray:
    """Interior grid {step, 2*step, ...} strictly inside (0, 1)."""
    if not (0.0 < step < 1.0):
        raise TuningError("grid step must lie in (0, 1)")
    count = int(round(1.0 / step)) - 1
    if count < 1:
        raise TuningError("grid step leaves no interior points")
    return np.round(np.arange(1, count + 1) * step, 12)


def evaluation_value(daily_gross: np.ndarray) -> float:
    """-ES/Sharpe of a daily gross-return series (lower is better)."""
    x = np.asarray(daily_gross, dtype=np.float64) - 100.0
    if x.size < 2 or x.std() == 0.0:
        return np.inf
    sharpe = math.sqrt(252.0) * x.mean() / x.std()
    if sharpe <= 0.0:
        return np.inf
    neg = x[x < 0.0]
    if neg.size == 0:
        return 0.0
    return float(-neg.mean() / sharpe)


def _check_window(window: int, length: int) -> None:
    if window < 1 or window % 2 == 0:
        raise TuningError(f"filter window must be odd and positive, got {window}")
    if window > length:
        raise TuningError(f"filter window {window} exceeds grid length {length}")


def mean_filter_1d(values: np.ndarray, window: int = FILTER_WINDOW_DEFAULT) -> np.ndarray:
    """Mean of the `window` nearest grid values; edge windows shift inward so
    every output averages exactly `window` entries."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise TuningError("mean_filter_1d expects a vector")
    _check_window(window, v.shape[0])
    if np.any(np.isnan(v)):
        raise TuningError("grid values must not be NaN")
    return _kernels.mean_filter_1d_core(v, window)


def mean_filter_2d(
    values: np.ndarray, mask: np.ndarray, window: int = FILTER_WINDOW_DEFAULT
) -> np.ndarray:
    """Masked mean filter with clipped neighborhoods.

    Cells outside `mask` are never read and come back NaN; neighborhoods are
    intersected with the mask so infeasible cells do not dilute the average.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    m = np.ascontiguousarray(mask, dtype=bool)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise TuningError("mean_filter_2d expects a square matrix")
    if m.shape != v.shape:
        raise TuningError("mask shape must match the grid")
    _check_window(window, v.shape[0])
    if np.any(np.isnan(v[m])):
        raise TuningError("feasible grid values must not be NaN")
    # masked cells may hold anything (even NaN); zero them so the kernels
    # can stay branch-light without ever reading them
    v = np.where(m, v, 0.0)
    return _kernels.mean_filter_2d_core(v, m, window)


@dataclass(frozen=True)
class EvaluationGrid:
    """Grid values plus the lambda axis (and feasibility mask in 2-D)."""

    lambdas: np.ndarray
    values: np.ndarray
    mask: np.ndarray | None = None


@dataclass(frozen=True)
class TuneResult:
    lambda1: float
    lambda2: float | None
    raw: EvaluationGrid
    filtered: EvaluationGrid


def tune(
    spec: ModelSpec,
    returns_for,
    grid_step: float = GRID_STEP_DEFAULT,
    filter_window: int = FILTER_WINDOW_DEFAULT,
) -> TuneResult:
    """Pick hyperparameters by scoring each grid point on the tuning year.

    `returns_for(lambda1, lambda2)` must return the daily portfolio gross
    returns the candidate produces on the tuning data, raising on a failed or
    infeasible solve; a failure prices that grid point at +inf.
    """
    arity = spec.n_hyperparams
    if arity == 0:
        raise ModelSpecError(f"{spec.code} has no hyperparameters to tune")
    grid = make_grid(grid_step)

    def year_value(lam1: float, lam2: float | None) -> float:
        try:
            series = returns_for(lam1, lam2)
        except EqcorrError:
            return np.inf
        return evaluation_value(series)

    if arity == 1:
        raw = np.array([year_value(float(lam), None) for lam in grid])
        filtered = mean_filter_1d(raw, filter_window)
        best = None
        for i, lam in enumerate(grid):
            if np.isfinite(filtered[i]) and (best is None or filtered[i] < filtered[best]):
                best = i
        if best is None:
            raise TuningError(f"every grid point failed while tuning {spec.name}")
        return TuneResult(
            lambda1=float(grid[best]),
            lambda2=None,
            raw=EvaluationGrid(grid, raw),
            filtered=EvaluationGrid(grid, filtered),
        )

    n = len(grid)
    mask = grid[:, None] + grid[None, :] <= 1.0 + 1e-9
    raw = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(n):
            if mask[i, j]:
                raw[i, j] = year_value(float(grid[i]), float(grid[j]))
    filtered = mean_filter_2d(raw, mask, filter_window)
    best_ij = None
    for i in range(n):
        for j in range(n):
            if not mask[i, j] or not np.isfinite(filtered[i, j]):
                continue
            if best_ij is None or filtered[i, j] < filtered[best_ij]:
                best_ij = (i, j)
    if best_ij is None:
        raise TuningError(f"every grid point failed while tuning {spec.name}")
    return TuneResult(
        lambda1=float(grid[best_ij[0]]),
        lambda2=float(grid[best_ij[1]]),
        raw=EvaluationGrid(grid, raw, mask),
        filtered=EvaluationGrid(grid, filtered, mask),
    )
