"""Bundled dataset: regeneration identity, shape, and downstream usability."""
import numpy as np

from eqcorr.market_data import covered_months, to_gross_returns
from eqcorr.synthetic import (
    DEFAULT_SEED,
    bundled_path,
    bundled_prices,
    generate_prices,
    main,
    tickers,
)


def test_regeneration_matches_bundled_arrays():
    generated = generate_prices(DEFAULT_SEED)
    bundled = bundled_prices()
    np.testing.assert_array_equal(generated.dates, bundled.dates)
    assert generated.tickers == bundled.tickers
    np.testing.assert_array_equal(generated.close, bundled.close)


def test_main_reproduces_bundled_csv_bytes(tmp_path):
    out = tmp_path / "regen.csv"
    assert main([str(out)]) == 0
    with bundled_path() as path:
        assert out.read_bytes() == path.read_bytes()


def test_panel_shape():
    panel = bundled_prices()
    assert panel.tickers == tickers() == tuple(f"T{i:02d}" for i in range(30))
    dates = panel.dates
    assert dates[0] >= np.datetime64("2016-01-01")
    assert dates[-1] <= np.datetime64("2019-12-31")
    assert np.all(np.diff(dates).astype(int) > 0)
    assert np.all(np.is_busday(dates))
    assert np.all(panel.close > 0)


def test_different_seed_differs():
    other = generate_prices(DEFAULT_SEED + 1)
    bundled = bundled_prices()
    assert not np.array_equal(other.close, bundled.close)


def test_returns_cover_four_full_years(bundled_returns):
    months = covered_months(bundled_returns)
    assert months == {(y, m) for y in range(2016, 2020) for m in range(1, 13)}
    assert bundled_returns.frequency == "daily"
    # same conversion as any consumer would perform
    regen = to_gross_returns(bundled_prices())
    np.testing.assert_array_equal(regen.returns, bundled_returns.returns)
