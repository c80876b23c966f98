"""Equal-correlation portfolio construction and walk-forward backtesting."""
from ._kernels import ACTIVE_PATH, HAS_NUMBA
from .backtest import (
    BacktestLedger,
    MonthRecord,
    RunSettings,
    required_months,
    run,
    tune_model,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateColumnWarning,
    DegenerateUniverseError,
    EmptyUniverseError,
    EqcorrError,
    EstimationError,
    InfeasibleError,
    InsufficientDataError,
    ModelSpecError,
    NumericError,
    TuningError,
    WindowError,
)
from .estimators import (
    ShrinkageEstimate,
    constant_correlation_target,
    estimate_covariance,
    sample_cov,
    sample_mean,
    shrink,
    spearman_matrix,
)
from .market_data import (
    PricePanel,
    ReturnsPanel,
    WindowSpec,
    load_prices,
    resample,
    slice_months,
    slice_window,
    to_gross_returns,
    write_prices_csv,
)
from .models import (
    LEVERAGE_CAP,
    MODEL_CATALOG,
    R_MIN_DEFAULT,
    ModelSpec,
    build,
    parse_model_name,
    r_min_from_monthly,
)
from .report import (
    REPORT_COLUMNS,
    MetricsRow,
    drawdown_series,
    expected_shortfall,
    format_report_table,
    mean_leverage,
    metrics_row,
    report,
    sharpe,
    write_report_csv,
)
from .risk import (
    corr_vec,
    d_eq_sq,
    equal_corr_weights,
    gradient_d_eq_sq,
    gradient_sigma_rho_sq,
    min_variance_weights,
    project_leverage,
    sigma_rho_sq,
)
from .selection import ClusterAssignment, cluster, distance_matrix, select
from .solver import SolveReport, SolverConfig, brute_force_oracle, solve
from .tuning import (
    EvaluationGrid,
    TuneResult,
    evaluation_value,
    make_grid,
    mean_filter_1d,
    mean_filter_2d,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_PATH",
    "HAS_NUMBA",
    "BacktestLedger",
    "MonthRecord",
    "RunSettings",
    "required_months",
    "run",
    "tune_model",
    "ConfigError",
    "DataError",
    "DegenerateColumnWarning",
    "DegenerateUniverseError",
    "EmptyUniverseError",
    "EqcorrError",
    "EstimationError",
    "InfeasibleError",
    "InsufficientDataError",
    "ModelSpecError",
    "NumericError",
    "TuningError",
    "WindowError",
    "ShrinkageEstimate",
    "constant_correlation_target",
    "estimate_covariance",
    "sample_cov",
    "sample_mean",
    "shrink",
    "spearman_matrix",
    "PricePanel",
    "ReturnsPanel",
    "WindowSpec",
    "load_prices",
    "resample",
    "slice_months",
    "slice_window",
    "to_gross_returns",
    "write_prices_csv",
    "LEVERAGE_CAP",
    "MODEL_CATALOG",
    "R_MIN_DEFAULT",
    "ModelSpec",
    "build",
    "parse_model_name",
    "r_min_from_monthly",
    "REPORT_COLUMNS",
    "MetricsRow",
    "drawdown_series",
    "expected_shortfall",
    "format_report_table",
    "mean_leverage",
    "metrics_row",
    "report",
    "sharpe",
    "write_report_csv",
    "corr_vec",
    "d_eq_sq",
    "equal_corr_weights",
    "gradient_d_eq_sq",
    "gradient_sigma_rho_sq",
    "min_variance_weights",
    "project_leverage",
    "sigma_rho_sq",
    "ClusterAssignment",
    "cluster",
    "distance_matrix",
    "select",
    "SolveReport",
    "SolverConfig",
    "brute_force_oracle",
    "solve",
    "EvaluationGrid",
    "TuneResult",
    "evaluation_value",
    "make_grid",
    "mean_filter_1d",
    "mean_filter_2d",
    "tune",
    "__version__",
]
