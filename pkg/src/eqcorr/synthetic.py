"""Deterministic synthetic price history bundled with the package.

Thirty tickers in six latent sectors follow a seeded geometric random walk
over the weekdays of 2016-2019.  Sector factors give the panel a clusterable
correlation structure and a spread of drifts, so selection, shrinkage,
tuning, and the return-floor models all have something real to chew on while
staying fully offline and reproducible: regenerating with the default seed
re-creates the bundled CSV byte for byte.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .market_data import PricePanel, load_prices, write_prices_csv

DEFAULT_SEED = 7
TICKER_COUNT = 30
SECTOR_COUNT = 6
START = "2016-01-01"
END = "2019-12-31"

# Annual net drift (%) per sector; assets inherit their sector's drift with a
# small jitter.  The spread keeps return-floor constraints attainable without
# making every portfolio a one-way bet.
SECTOR_ANNUAL_DRIFT = (4.0, 8.0, 12.0, 16.0, 24.0, 40.0)
FACTOR_VOL = 0.9  # daily % vol of each sector factor
IDIO_VOL = 0.8  # daily % vol of the idiosyncratic noise
TRADING_DAYS_PER_YEAR = 252.0

DATA_RESOURCE = "synthetic_prices.csv"


def tickers() -> tuple[str, ...]:
    return tuple(f"T{i:02d}" for i in range(TICKER_COUNT))


def sector_of(index: int) -> int:
    return index // (TICKER_COUNT // SECTOR_COUNT)


def weekday_dates(start: str = START, end: str = END) -> np.ndarray:
    days = np.arange(
        np.datetime64(start, "D"), np.datetime64(end, "D") + 1, dtype="datetime64[D]"
    )
    return days[np.is_busday(days)]


def generate_prices(seed: int = DEFAULT_SEED) -> PricePanel:
    """Seeded geometric random walk with sector-factor returns.

    Draw order is part of the contract: initial prices, betas, drift jitter,
    sector factors, idiosyncratic noise.  Changing it would silently break
    the bundled dataset's regeneration identity.
    """
    rng = np.random.default_rng(seed)
    dates = weekday_dates()
    n_days = len(dates)
    d = TICKER_COUNT

    p0 = rng.uniform(20.0, 200.0, size=d)
    betas = rng.uniform(0.7, 1.3, size=d)
    jitter = rng.uniform(-0.01, 0.01, size=d)
    factors = rng.standard_normal((n_days - 1, SECTOR_COUNT)) * FACTOR_VOL
    idio = rng.standard_normal((n_days - 1, d)) * IDIO_VOL

    sectors = np.array([sector_of(i) for i in range(d)])
    drift = np.array([SECTOR_ANNUAL_DRIFT[s] for s in sectors]) / TRADING_DAYS_PER_YEAR
    net = drift + jitter + betas * factors[:, sectors] + idio

    close = np.empty((n_days, d))
    close[0] = p0
    for t in range(1, n_days):
        close[t] = close[t - 1] * (1.0 + net[t - 1] / 100.0)
    return PricePanel(dates, tickers(), close)


def bundled_path():
    """Context manager yielding a concrete filesystem path to the bundled CSV."""
    return resources.as_file(resources.files("eqcorr").joinpath("data", DATA_RESOURCE))


def bundled_prices() -> PricePanel:
    with bundled_path() as path:
        panel, dropped = load_prices(path)
    if dropped:
        raise AssertionError(f"bundled dataset has unusable columns: {dropped}")
    return panel


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="Regenerate the bundled synthetic price CSV."
    )
    parser.add_argument("out", help="output CSV path")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)
    write_prices_csv(generate_prices(args.seed), args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
