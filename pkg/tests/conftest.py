"""Shared fixtures: SPD matrix factory, panel builders, bundled dataset."""
from __future__ import annotations

import numpy as np
import pytest

from eqcorr.market_data import ReturnsPanel, to_gross_returns
from eqcorr.synthetic import bundled_prices


def weekdays(n: int, start: str = "2020-01-06") -> np.ndarray:
    """n consecutive weekday dates starting at `start` (a Monday by default)."""
    days = np.arange(np.datetime64(start, "D"), np.datetime64(start, "D") + 2 * n + 7)
    days = days[np.is_busday(days)]
    return days[:n]


def panel_from_net(net, tickers=None, start="2020-01-06", frequency="daily") -> ReturnsPanel:
    """ReturnsPanel from a matrix of net % returns (rows=days)."""
    net = np.atleast_2d(np.asarray(net, dtype=np.float64))
    if tickers is None:
        tickers = tuple(f"T{i:02d}" for i in range(net.shape[1]))
    return ReturnsPanel(weekdays(net.shape[0], start), tuple(tickers), 100.0 + net, frequency)


@pytest.fixture
def make_panel():
    return panel_from_net


@pytest.fixture
def spd():
    """Factory for random symmetric positive-definite matrices."""

    def factory(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
        a = rng.standard_normal((d, 2 * d))
        return scale * (a @ a.T) / (2 * d) + 1e-3 * np.eye(d)

    return factory


@pytest.fixture(scope="session")
def bundled_returns() -> ReturnsPanel:
    return to_gross_returns(bundled_prices())


# --- acceptance summary -------------------------------------------------------
#
# Every test in test_acceptance.py maps to one named criterion; the terminal
# summary prints one ACCEPT[...] PASS/FAIL line per criterion so a run's
# verdict is greppable without parsing pytest's own output.

_ACCEPTANCE_OUTCOMES: dict[str, str] = {}
_SEVERITY = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    tag = report.nodeid.rsplit("::", 1)[1]
    tag = tag.removeprefix("test_accept_").split("[", 1)[0]
    if report.skipped:
        outcome = "SKIP"
    elif report.failed:
        outcome = "FAIL"
    else:
        outcome = "PASS"
    current = _ACCEPTANCE_OUTCOMES.get(tag, "PASS")
    if _SEVERITY[outcome] >= _SEVERITY[current]:
        _ACCEPTANCE_OUTCOMES[tag] = outcome
    else:
        _ACCEPTANCE_OUTCOMES[tag] = current


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for tag, outcome in _ACCEPTANCE_OUTCOMES.items():
        terminalreporter.write_line(f"ACCEPT[{tag}] {outcome}")
