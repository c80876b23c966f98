"""Performance metrics against hand-computed values, plus the summary table."""
import math

import numpy as np
import pytest

from eqcorr.backtest import BacktestLedger, MonthRecord
from eqcorr.errors import DataError, DegenerateColumnWarning
from eqcorr.market_data import ReturnsPanel, resample
from eqcorr.report import (
    REPORT_COLUMNS,
    drawdown_series,
    expected_shortfall,
    format_report_table,
    mean_leverage,
    metrics_row,
    report,
    sharpe,
    write_report_csv,
)

from conftest import weekdays


def test_sharpe_frozen_examples():
    # daily nets (-0.9, 1.1): mean 0.1, population std exactly 1.0
    daily = np.array([99.1, 101.1])
    assert sharpe(daily, "daily") == pytest.approx(math.sqrt(252.0) * 0.1, rel=1e-12)
    assert sharpe(daily, "daily") == pytest.approx(1.587, abs=1e-3)
    # monthly nets (-1, 3): mean 1.0, std 2.0
    monthly = np.array([99.0, 103.0])
    assert sharpe(monthly, "monthly") == pytest.approx(math.sqrt(12.0) * 0.5, rel=1e-12)
    assert sharpe(monthly, "monthly") == pytest.approx(1.732, abs=1e-3)
    assert sharpe(monthly, "weekly") == pytest.approx(math.sqrt(52.0) * 0.5, rel=1e-12)
    with pytest.raises(DataError):
        sharpe(monthly, "hourly")


def test_sharpe_net_gross_consistency():
    rng = np.random.default_rng(0)
    net = rng.normal(0.1, 1.0, 100)
    got = sharpe(100.0 + net, "daily")
    assert got == pytest.approx(math.sqrt(252.0) * net.mean() / net.std(), rel=1e-12)


def test_sharpe_degenerate_series_flagged():
    with pytest.warns(DegenerateColumnWarning):
        assert math.isnan(sharpe(np.array([100.5]), "daily"))
    with pytest.warns(DegenerateColumnWarning):
        assert math.isnan(sharpe(np.full(10, 101.0), "monthly"))


def test_expected_shortfall_frozen_examples():
    assert expected_shortfall(100.0 + np.array([1.0, -2.0, 3.0, -4.0])) == -3.0
    assert expected_shortfall(np.array([100.1, 102.0])) == 0.0
    assert expected_shortfall(np.array([99.0])) == -1.0


def test_drawdown_frozen_example():
    # cumulative path 1.0, 1.1, 0.99: ten percent under the 1.1 peak
    got = drawdown_series(np.array([100.0, 110.0, 90.0]))
    np.testing.assert_allclose(got, [0.0, 0.0, -10.0], atol=1e-12)
    # monotone rising path never leaves its running maximum
    np.testing.assert_allclose(
        drawdown_series(np.array([101.0, 100.5, 102.0][:2])), [0.0, 0.0], atol=1e-12
    )
    np.testing.assert_array_equal(drawdown_series(np.full(5, 100.0)), np.zeros(5))


def test_drawdown_random_series_nonpositive_and_starts_at_zero():
    rng = np.random.default_rng(1)
    for _ in range(100):
        gross = 100.0 + rng.normal(0, 1.5, int(rng.integers(2, 80)))
        dd = drawdown_series(gross)
        assert dd[0] == 0.0
        assert np.all(dd <= 1e-12)
    with pytest.raises(DataError):
        drawdown_series(np.array([]))


def test_mean_leverage_frozen_examples():
    assert mean_leverage([np.array([0.25, 0.75])]) == 1.0
    assert mean_leverage([np.array([1.5, -0.5])] * 3) == pytest.approx(2.0)
    assert mean_leverage([np.array([1.0, 0.0]), np.array([1.5, -0.5])]) == pytest.approx(1.5)
    with pytest.raises(DataError):
        mean_leverage([])


def _ledger(daily_net, weights, name="A1-SC"):
    daily = ReturnsPanel(
        weekdays(len(daily_net), "2020-01-06"),
        ("PORT",),
        100.0 + np.asarray(daily_net)[:, None],
        "daily",
    )
    records = tuple(
        MonthRecord(2020, i + 1, ("X", "Y"), np.asarray(w), None, None, "ok")
        for i, w in enumerate(weights)
    )
    return BacktestLedger(
        model_name=name,
        records=records,
        daily=daily,
        weekly=resample(daily, "weekly"),
        monthly=resample(daily, "monthly"),
    )


def test_metrics_row_matches_hand_computation():
    rng = np.random.default_rng(2)
    net = rng.normal(0.05, 0.9, 44)  # spans two months
    ledger = _ledger(net, [[0.5, 0.5], [1.2, -0.2]])
    row = metrics_row("A1-SC", ledger)

    monthly_net = ledger.monthly.returns[:, 0] - 100.0
    assert row.mean_monthly_return_pct == pytest.approx(12.0 * monthly_net.mean(), rel=1e-12)
    assert row.monthly_return_std_pct == pytest.approx(
        math.sqrt(12.0) * monthly_net.std(), rel=1e-12
    )
    neg = monthly_net[monthly_net < 0]
    assert row.monthly_es == pytest.approx(neg.mean() if neg.size else 0.0, rel=1e-12)
    assert row.mean_leverage == pytest.approx((1.0 + 1.4) / 2.0, rel=1e-12)
    assert row.mean_daily_drawdown_pct == pytest.approx(
        drawdown_series(ledger.daily.returns[:, 0]).mean(), rel=1e-12
    )
    assert row.mean_daily_drawdown_pct <= 0.0
    assert row.sharpe_daily == pytest.approx(
        math.sqrt(252.0) * net.mean() / net.std(), rel=1e-12
    )


def test_constant_monthly_return_annualizes_cleanly():
    # Jan and Feb 2020 hold exactly 20 weekdays each; a constant daily rate of
    # 1.01^(1/20) compounds to exactly 1% per month -> annualized mean 12x,
    # zero dispersion flags the monthly Sharpe
    net = np.full(40, 100.0 * (1.01 ** (1.0 / 20.0) - 1.0))
    ledger = _ledger(net, [[1.0, 0.0], [1.0, 0.0]])
    with pytest.warns(DegenerateColumnWarning):
        row = metrics_row("A1-SC", ledger)
    assert row.mean_monthly_return_pct == pytest.approx(12.0, abs=1e-6)
    assert row.monthly_return_std_pct == pytest.approx(0.0, abs=1e-9)
    assert math.isnan(row.sharpe_monthly)


def test_report_sorted_and_csv_layout(tmp_path):
    rng = np.random.default_rng(3)
    ledgers = {
        name: _ledger(rng.normal(0.05, 0.8, 44), [[0.6, 0.4], [0.7, 0.3]], name)
        for name in ("C1-SC", "A1-SC", "B1-SC")
    }
    rows = report(ledgers)
    assert [r.model for r in rows] == ["A1-SC", "B1-SC", "C1-SC"]

    path = tmp_path / "report.csv"
    write_report_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "A1-SC"
    assert float(first[1]) == pytest.approx(rows[0].mean_monthly_return_pct, rel=1e-15)

    text = format_report_table(rows)
    for column in REPORT_COLUMNS:
        assert column in text
    assert text.splitlines()[1].startswith("A1-SC")


def test_report_columns_are_the_table_set():
    assert REPORT_COLUMNS == (
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
