"""Walk-forward engine: tune yearly, re-select and re-solve monthly.

For every backtest year Y the hyperparameters (if the model has any) are
tuned on year Y-1: each candidate is solved once on that year's returns and
scored in-sample, so a run needs the training window plus one prior calendar
year of history and nothing more.  For every month, the preceding training
window picks the universe (clustered selection), estimates the moments,
builds the model, and solves for weights that are then held fixed through
the month.  A failed month never breaks the run: it falls back to the
equal-correlation portfolio of the month's universe (projected onto the
leverage cap) and is flagged.

Nothing downstream of a month's first trading day can influence that month's
weights: training windows end strictly before the test month and tuning uses
only the prior year.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EqcorrError, InfeasibleError, NumericError, WindowError
from .estimators import ShrinkageEstimate, estimate_covariance, sample_mean, spearman_matrix
from .market_data import (
    ReturnsPanel,
    WindowSpec,
    add_months,
    covered_months,
    month_range,
    resample,
    slice_months,
    slice_window,
)
from .models import LEVERAGE_CAP, ModelSpec, build
from .risk import equal_corr_weights, project_leverage
from .selection import cluster, distance_matrix, select
from .solver import SolverConfig, solve
from .tuning import (
    FILTER_WINDOW_DEFAULT,
    GRID_STEP_DEFAULT,
    TuneResult,
    tune,
)


@dataclass(frozen=True)
class RunSettings:
    """Engine knobs; defaults follow the reference configuration."""

    k: int = 20
    linkage: str = "average"
    grid_step: float = GRID_STEP_DEFAULT
    filter_window: int = FILTER_WINDOW_DEFAULT
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass(frozen=True)
class MonthRecord:
    year: int
    month: int
    tickers: tuple[str, ...]
    weights: np.ndarray
    lambda1: float | None
    lambda2: float | None
    status: str  # "ok" or "fallback"

    @property
    def leverage(self) -> float:
        return float(np.abs(self.weights).sum())


@dataclass(frozen=True)
class BacktestLedger:
    """Everything a run produced: monthly holdings plus the return series."""

    model_name: str
    records: tuple[MonthRecord, ...]
    daily: ReturnsPanel
    weekly: ReturnsPanel
    monthly: ReturnsPanel

    def write_weights_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("year,month,ticker,weight\n")
            for rec in self.records:
                for ticker, weight in zip(rec.tickers, rec.weights):
                    fh.write(f"{rec.year},{rec.month},{ticker},{repr(float(weight))}\n")

    def write_returns_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("date,frequency,gross_return\n")
            for panel in (self.daily, self.weekly, self.monthly):
                for date, value in zip(panel.dates, panel.returns[:, 0]):
                    fh.write(f"{date},{panel.frequency},{repr(float(value))}\n")


@dataclass(frozen=True)
class _Prepared:
    """Selected universe plus its training moments for one solve context."""

    tickers: tuple[str, ...]
    train: ReturnsPanel
    mu: np.ndarray


def _prepare(train: ReturnsPanel, settings: RunSettings) -> _Prepared:
    """Cluster the training window's tickers and keep one per cluster."""
    rho = spearman_matrix(train)
    k_eff = min(settings.k, len(train.tickers))
    assignment = cluster(distance_matrix(rho), k_eff, settings.linkage)
    chosen = select(train, assignment)
    sub = train.take_tickers(chosen)
    return _Prepared(tickers=tuple(chosen), train=sub, mu=sample_mean(sub))


def _solve_prepared(
    prepared: _Prepared,
    est: ShrinkageEstimate | None,
    spec: ModelSpec,
    lambda1: float | None,
    lambda2: float | None,
    solver: SolverConfig,
) -> np.ndarray:
    """Weights for one prepared universe; raises on failure."""
    full = spec.with_lambdas(lambda1, lambda2)
    if len(prepared.tickers) == 1:
        if full.has_return_floor and (float(prepared.mu[0]) - 100.0) < full.r_min:
            raise InfeasibleError("single-asset universe misses the return floor")
        return np.array([1.0])
    problem = build(full, prepared.mu, est)
    report = solve(problem, solver)
    if not report.converged:
        raise NumericError(f"solve did not converge for {full.name}")
    return report.w


class _MonthEngine:
    """Caches per-month selection/estimation across the months of a run."""

    def __init__(self, data: ReturnsPanel, window: WindowSpec, spec: ModelSpec, settings: RunSettings):
        self.data = data
        self.window = window
        self.spec = spec
        self.settings = settings
        self._prepared: dict[tuple[int, int], _Prepared] = {}
        self._tests: dict[tuple[int, int], ReturnsPanel] = {}
        self._estimates: dict[tuple[int, int], ShrinkageEstimate | None] = {}

    def prepared(self, month: tuple[int, int]) -> _Prepared:
        if month not in self._prepared:
            train, test = slice_window(self.data, self.window, month)
            prepared = _prepare(train, self.settings)
            self._prepared[month] = prepared
            self._tests[month] = test.take_tickers(list(prepared.tickers))
        return self._prepared[month]

    def test_panel(self, month: tuple[int, int]) -> ReturnsPanel:
        self.prepared(month)
        return self._tests[month]

    def estimate(self, month: tuple[int, int]) -> ShrinkageEstimate | None:
        if month not in self._estimates:
            prepared = self.prepared(month)
            if len(prepared.tickers) == 1:
                self._estimates[month] = None
            else:
                self._estimates[month] = estimate_covariance(
                    prepared.train, self.spec.cov_method
                )
        return self._estimates[month]

    def solve_month(
        self, month: tuple[int, int], lambda1: float | None, lambda2: float | None
    ) -> tuple[_Prepared, np.ndarray]:
        """Weights for one month; raises on failure (callers choose fallback)."""
        prepared = self.prepared(month)
        w = _solve_prepared(
            prepared, self.estimate(month), self.spec, lambda1, lambda2, self.settings.solver
        )
        return prepared, w

    def fallback_weights(self, month: tuple[int, int]) -> np.ndarray:
        """Equal-correlation weights of the month's universe, leverage-capped;
        equal weights if even those cannot be formed."""
        prepared = self.prepared(month)
        d = len(prepared.tickers)
        if d == 1:
            return np.array([1.0])
        try:
            weq = equal_corr_weights(self.estimate(month))
            return project_leverage(weq, LEVERAGE_CAP)
        except EqcorrError:
            return np.full(d, 1.0 / d)


def required_months(
    spec: ModelSpec, window: WindowSpec, months: list[tuple[int, int]]
) -> set[tuple[int, int]]:
    """Every calendar month the run will touch, tuning year included."""
    needed: set[tuple[int, int]] = set()
    for month in months:
        needed.add(month)
        needed.update(month_range(add_months(month, -window.train_months), window.train_months))
    if spec.n_hyperparams > 0:
        for year in sorted({y for y, _ in months}):
            needed.update((year - 1, m) for m in range(1, 13))
    return needed


def tune_model(
    spec: ModelSpec,
    tuning_year: int,
    data: ReturnsPanel,
    window: WindowSpec,
    settings: RunSettings | None = None,
) -> TuneResult:
    """Tune a model's hyperparameters on one calendar year of returns.

    Every grid point is solved once with the tuning year as its training
    window (selection included) and scored on that same year's portfolio
    returns, so the choice uses no data from the backtest year.
    """
    settings = settings or RunSettings()
    year_panel = slice_months(data, [(tuning_year, m) for m in range(1, 13)])
    prepared = _prepare(year_panel, settings)
    est = (
        None
        if len(prepared.tickers) == 1
        else estimate_covariance(prepared.train, spec.cov_method)
    )

    def returns_for(lam1: float | None, lam2: float | None) -> np.ndarray:
        w = _solve_prepared(prepared, est, spec, lam1, lam2, settings.solver)
        return prepared.train.returns @ w

    return tune(
        spec,
        returns_for,
        grid_step=settings.grid_step,
        filter_window=settings.filter_window,
    )


def run(
    spec: ModelSpec,
    data: ReturnsPanel,
    window: WindowSpec,
    years,
    settings: RunSettings | None = None,
    months: list[tuple[int, int]] | None = None,
) -> BacktestLedger:
    """Walk the months, one ledger out.

    `years` expands to all twelve months of each year; pass `months` instead
    for a partial range (used to verify nothing peeks past a truncation).
    """
    settings = settings or RunSettings()
    if data.frequency != "daily":
        raise WindowError("backtest expects a daily returns panel")
    if months is None:
        months = [(int(y), m) for y in sorted(years) for m in range(1, 13)]
    else:
        months = sorted(months)
    if not months:
        raise WindowError("no months to run")

    covered = covered_months(data)
    missing = sorted(required_months(spec, window, months) - covered)
    if missing:
        names = ", ".join(f"{y:04d}-{m:02d}" for y, m in missing)
        raise WindowError(f"data does not cover required months: {names}")

    lambdas_by_year: dict[int, tuple[float | None, float | None]] = {}
    for year in sorted({y for y, _ in months}):
        if spec.n_hyperparams == 0:
            lambdas_by_year[year] = (None, None)
        else:
            tuned = tune_model(spec, year - 1, data, window, settings)
            lambdas_by_year[year] = (tuned.lambda1, tuned.lambda2)

    engine = _MonthEngine(data, window, spec, settings)
    records: list[MonthRecord] = []
    dates: list[np.ndarray] = []
    values: list[np.ndarray] = []
    for month in months:
        lam1, lam2 = lambdas_by_year[month[0]]
        try:
            prepared, w = engine.solve_month(month, lam1, lam2)
            status = "ok"
        except EqcorrError:
            prepared = engine.prepared(month)
            w = engine.fallback_weights(month)
            status = "fallback"
        records.append(
            MonthRecord(
                year=month[0],
                month=month[1],
                tickers=prepared.tickers,
                weights=w,
                lambda1=lam1,
                lambda2=lam2,
                status=status,
            )
        )
        test = engine.test_panel(month)
        dates.append(test.dates)
        values.append(test.returns @ w)

    daily = ReturnsPanel(
        np.concatenate(dates),
        ("PORT",),
        np.concatenate(values)[:, None],
        "daily",
    )
    return BacktestLedger(
        model_name=spec.name,
        records=tuple(records),
        daily=daily,
        weekly=resample(daily, "weekly"),
        monthly=resample(daily, "monthly"),
    )
