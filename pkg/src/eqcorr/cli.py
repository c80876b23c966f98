"""Command-line front door: backtest, tune, select, summary, demo.

Configuration is a plain ``key = value`` file (``#`` comments allowed); every
flag overrides its config key.  All error paths exit non-zero after printing
a single ``error[<code>]: <message>`` line to stderr so scripts can grep for
the code.  Given the same config and seed the output directory's contents
are byte-identical, regardless of ``--jobs``.
"""
from __future__ import annotations

import argparse
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .backtest import BacktestLedger, RunSettings, run, tune_model
from .errors import ConfigError, DataError, EqcorrError
from .estimators import sample_cov, spearman_matrix
from .market_data import (
    PricePanel,
    ReturnsPanel,
    WindowSpec,
    covered_months,
    load_prices,
    resample,
    slice_window,
    to_gross_returns,
)
from .models import ModelSpec, parse_model_name
from .report import format_report_table, report, write_report_csv
from .risk import corr_vec, equal_corr_weights, min_variance_weights
from .selection import cluster, distance_matrix, select
from .solver import SolverConfig
from .synthetic import bundled_path
from .tuning import EvaluationGrid

DEFAULT_MODELS = "A1-SC,B1-SC,C1-SC,D1-SC"

CONFIG_KEYS = {
    "data": str,
    "universe": str,
    "train_months": int,
    "test_months": int,
    "years": str,
    "models": str,
    "k": int,
    "linkage": str,
    "grid_step": float,
    "filter_window": int,
    "max_iter": int,
    "tol": float,
    "n_random_starts": int,
    "seed": int,
    "jobs": int,
    "out": str,
}


def read_config(path: str) -> dict:
    """Parse a key = value config file against the documented key list."""
    values: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def parse_years(text: str) -> list[int]:
    """'2017-2019' (inclusive) or '2017,2019' → sorted list of years."""
    text = text.strip()
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            first, last = int(lo), int(hi)
            if last < first:
                raise ValueError
            return list(range(first, last + 1))
        return sorted({int(tok) for tok in text.split(",") if tok.strip()})
    except ValueError:
        raise ConfigError(f"cannot parse years {text!r}") from None


def parse_models(text: str) -> list[ModelSpec]:
    specs = [parse_model_name(tok) for tok in text.split(",") if tok.strip()]
    if not specs:
        raise ConfigError("no models configured")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate models in {text!r}")
    return specs


def _effective(config: dict, args: argparse.Namespace, key: str, default):
    """Flag beats config beats default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    return config.get(key, default)


def _load_returns(config: dict, args: argparse.Namespace) -> ReturnsPanel:
    data = _effective(config, args, "data", None)
    if data is None:
        with bundled_path() as path:
            panel, _ = load_prices(path)
    else:
        panel, _ = load_prices(data)
    universe = _effective(config, args, "universe", None)
    if universe is not None:
        wanted = [
            tok
            for line in Path(universe).read_text().splitlines()
            for tok in line.replace(",", " ").split()
        ]
        unknown = sorted(set(wanted) - set(panel.tickers))
        if unknown:
            raise DataError(f"universe tickers not in data: {', '.join(unknown)}")
        if not wanted:
            raise DataError(f"universe file {universe} names no tickers")
        idx = [panel.tickers.index(t) for t in wanted]
        panel = PricePanel(panel.dates, tuple(wanted), panel.close[:, idx])
    return to_gross_returns(panel)


def _settings(config: dict, args: argparse.Namespace) -> RunSettings:
    solver = SolverConfig(
        max_iter=int(_effective(config, args, "max_iter", SolverConfig.max_iter)),
        tol=float(_effective(config, args, "tol", SolverConfig.tol)),
        n_random_starts=int(
            _effective(config, args, "n_random_starts", SolverConfig.n_random_starts)
        ),
        seed=int(_effective(config, args, "seed", SolverConfig.seed)),
    )
    return RunSettings(
        k=int(_effective(config, args, "k", RunSettings.k)),
        linkage=str(_effective(config, args, "linkage", RunSettings.linkage)),
        grid_step=float(_effective(config, args, "grid_step", RunSettings.grid_step)),
        filter_window=int(
            _effective(config, args, "filter_window", RunSettings.filter_window)
        ),
        solver=solver,
    )


def _window(config: dict, args: argparse.Namespace) -> WindowSpec:
    if getattr(args, "window", None) is not None:
        parts = args.window.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--window expects 'train,test', got {args.window!r}")
        try:
            return WindowSpec(int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError(f"--window expects integers, got {args.window!r}") from None
    return WindowSpec(
        int(config.get("train_months", 12)), int(config.get("test_months", 1))
    )


def _default_years(data: ReturnsPanel) -> list[int]:
    """Years with full coverage whose prior year is also fully covered."""
    covered = covered_months(data)
    full = {y for y in {ym[0] for ym in covered} if all((y, m) in covered for m in range(1, 13))}
    years = sorted(y for y in full if (y - 1) in full)
    if not years:
        raise DataError("data does not cover any backtestable year")
    return years


def _write_float_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(value) -> str:
    return repr(float(value))


# --- backtest -------------------------------------------------------------

def _run_one(payload) -> tuple[str, BacktestLedger]:
    spec, data, window, years, settings = payload
    return spec.name, run(spec, data, window, years, settings)


def cmd_backtest(config: dict, args: argparse.Namespace) -> int:
    data = _load_returns(config, args)
    window = _window(config, args)
    settings = _settings(config, args)
    specs = parse_models(str(_effective(config, args, "models", DEFAULT_MODELS)))
    years_text = _effective(config, args, "years", None)
    years = parse_years(years_text) if years_text else _default_years(data)
    jobs = int(_effective(config, args, "jobs", 1))
    out = Path(_effective(config, args, "out", "eqcorr-out"))

    specs = sorted(specs, key=lambda s: s.name)
    payloads = [(spec, data, window, years, settings) for spec in specs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, payloads))
    else:
        results = [_run_one(p) for p in payloads]
    ledgers = dict(results)

    created: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(ledgers):
            model_dir = out / name
            model_dir.mkdir(exist_ok=True)
            created.append(model_dir)
            ledgers[name].write_weights_csv(model_dir / "weights.csv")
            ledgers[name].write_returns_csv(model_dir / "returns.csv")
        rows = report(ledgers)
        write_report_csv(rows, out / "report.csv")
        created.append(out / "report.csv")
        (out / "report.txt").write_text(format_report_table(rows))
        created.append(out / "report.txt")
    except BaseException:
        for path in reversed(created):
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            else:
                path.unlink(missing_ok=True)
        raise
    print(f"wrote {out / 'report.csv'} ({len(ledgers)} models, years {years[0]}-{years[-1]})")
    return 0


# --- tune -----------------------------------------------------------------

def _dump_grid(path: Path, grid: EvaluationGrid) -> None:
    lambdas = grid.lambdas
    if grid.values.ndim == 1:
        rows = (
            [f"{lam:.6g}", _fmt(val)] for lam, val in zip(lambdas, grid.values)
        )
        _write_float_csv(path, "lambda1,value", rows)
        return
    rows = []
    for i, l1 in enumerate(lambdas):
        for j, l2 in enumerate(lambdas):
            if grid.mask is None or grid.mask[i, j]:
                rows.append([f"{l1:.6g}", f"{l2:.6g}", _fmt(grid.values[i, j])])
    _write_float_csv(path, "lambda1,lambda2,value", rows)


def cmd_tune(config: dict, args: argparse.Namespace) -> int:
    data = _load_returns(config, args)
    window = _window(config, args)
    settings = _settings(config, args)
    spec = parse_model_name(args.model)
    result = tune_model(spec, args.year, data, window, settings)
    if args.dump_grids:
        out = Path(_effective(config, args, "out", "eqcorr-out"))
        out.mkdir(parents=True, exist_ok=True)
        _dump_grid(out / f"{spec.name}-{args.year}-raw.csv", result.raw)
        _dump_grid(out / f"{spec.name}-{args.year}-filtered.csv", result.filtered)
    if result.lambda2 is None:
        print(f"{spec.name} year={args.year} lambda1={result.lambda1:.6g}")
    else:
        print(
            f"{spec.name} year={args.year} lambda1={result.lambda1:.6g}"
            f" lambda2={result.lambda2:.6g}"
        )
    return 0


# --- select ---------------------------------------------------------------

def cmd_select(config: dict, args: argparse.Namespace) -> int:
    data = _load_returns(config, args)
    window = _window(config, args)
    settings = _settings(config, args)
    try:
        year_s, month_s = args.month.split("-", 1)
        month = (int(year_s), int(month_s))
    except ValueError:
        raise ConfigError(f"--month expects YYYY-MM, got {args.month!r}") from None
    train, _ = slice_window(data, window, month)
    rho = spearman_matrix(train)
    k_eff = min(settings.k, len(train.tickers))
    assignment = cluster(distance_matrix(rho), k_eff, settings.linkage)
    chosen = select(train, assignment)
    out_setting = _effective(config, args, "out", None)
    if out_setting is not None:
        out = Path(out_setting)
        out.mkdir(parents=True, exist_ok=True)
        picked = set(chosen)
        rows = (
            [ticker, str(assignment.labels[i]), str(ticker in picked).lower()]
            for i, ticker in enumerate(train.tickers)
        )
        _write_float_csv(out / "selection.csv", "ticker,cluster,selected", rows)
    print(",".join(chosen))
    return 0


# --- summary ----------------------------------------------------------------

def cmd_summary(config: dict, args: argparse.Namespace) -> int:
    data = _load_returns(config, args)
    out = Path(_effective(config, args, "out", "eqcorr-out"))
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for frequency in ("daily", "weekly", "monthly"):
        panel = data if frequency == "daily" else resample(data, frequency)
        for i, date in enumerate(panel.dates):
            cross = panel.returns[i]
            std = float(cross.std()) if cross.size > 1 else float("nan")
            rows.append([str(date), frequency, _fmt(cross.mean()), _fmt(std)])
    _write_float_csv(out / "summary.csv", "date,frequency,mean,std", rows)
    print(f"wrote {out / 'summary.csv'}")
    return 0


# --- demo -------------------------------------------------------------------

DEMO_COV = np.array(
    [
        [1.0, 0.3, 0.1],
        [0.3, 1.5, 0.2],
        [0.1, 0.2, 2.0],
    ]
)
DEMO_ASSETS = ("A", "B", "C")


def _read_cov_csv(path: str) -> tuple[tuple[str, ...], np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"covariance file {path} is empty")
    assets = tuple(tok.strip() for tok in lines[0].split(","))
    matrix = []
    for lineno, line in enumerate(lines[1:], start=2):
        row = [float(tok) for tok in line.split(",")]
        if len(row) != len(assets):
            raise DataError(f"{path}:{lineno}: expected {len(assets)} values")
        matrix.append(row)
    if len(matrix) != len(assets):
        raise DataError(f"{path}: expected {len(assets)} rows, got {len(matrix)}")
    return assets, np.array(matrix)


def cmd_demo(config: dict, args: argparse.Namespace) -> int:
    if args.cov is not None:
        assets, cov = _read_cov_csv(args.cov)
    else:
        assets, cov = DEMO_ASSETS, DEMO_COV
    d = len(assets)
    strategies = {
        "equal_weight": np.full(d, 1.0 / d),
        "equal_correlation": equal_corr_weights(cov),
        "min_variance": min_variance_weights(cov),
    }
    out = Path(_effective(config, args, "out", "eqcorr-out"))
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in ("equal_weight", "equal_correlation", "min_variance"):
        w = strategies[name]
        c = corr_vec(w, cov)
        for i, asset in enumerate(assets):
            rows.append([name, asset, _fmt(w[i]), _fmt(c[i])])
    _write_float_csv(out / "demo.csv", "strategy,asset,weight,correlation", rows)
    print(f"wrote {out / 'demo.csv'}")
    return 0


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqcorr",
        description="Equal-correlation portfolio models with walk-forward backtesting.",
    )
    parser.add_argument("--config", help="key = value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, jobs: bool = False) -> None:
        p.add_argument("--data", help="price CSV (default: bundled synthetic dataset)")
        p.add_argument("--universe", help="file listing the tickers to keep")
        p.add_argument("--out", help="output directory (default eqcorr-out)")
        p.add_argument("--seed", type=int, help="solver random-start seed")
        p.add_argument("--window", help="train,test months (default 12,1)")
        p.add_argument("--k", type=int, help="number of clusters to keep")
        p.add_argument("--linkage", help="cluster linkage: average|single|complete")
        p.add_argument("--grid-step", dest="grid_step", type=float, help="tuning grid step")
        p.add_argument(
            "--filter-window", dest="filter_window", type=int, help="mean-filter window"
        )
        p.add_argument(
            "--n-random-starts", dest="n_random_starts", type=int,
            help="extra random solver starts",
        )
        if jobs:
            p.add_argument("--jobs", type=int, help="parallel model workers")

    p_backtest = sub.add_parser("backtest", help="run models and write ledgers + report")
    common(p_backtest, jobs=True)
    p_backtest.add_argument("--models", help=f"comma list (default {DEFAULT_MODELS})")
    p_backtest.add_argument("--years", help="e.g. 2017-2019 (default: all backtestable)")
    p_backtest.set_defaults(func=cmd_backtest)

    p_tune = sub.add_parser("tune", help="tune one model's hyperparameters for a year")
    common(p_tune)
    p_tune.add_argument("model", help="model name, e.g. B1-SC")
    p_tune.add_argument("--year", type=int, required=True, help="tuning year")
    p_tune.add_argument(
        "--dump-grids", action="store_true", help="write raw/filtered grid CSVs"
    )
    p_tune.set_defaults(func=cmd_tune)

    p_select = sub.add_parser("select", help="show the universe for one test month")
    common(p_select)
    p_select.add_argument("--month", required=True, help="test month, YYYY-MM")
    p_select.set_defaults(func=cmd_select)

    p_summary = sub.add_parser("summary", help="cross-sectional return stats per date")
    common(p_summary)
    p_summary.set_defaults(func=cmd_summary)

    p_demo = sub.add_parser("demo", help="three strategies on a 3-asset covariance")
    p_demo.add_argument("--cov", help="covariance CSV (header = asset names)")
    p_demo.add_argument("--out", help="output directory (default eqcorr-out)")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config) if args.config else {}
        return args.func(config, args)
    except EqcorrError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"error[internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
