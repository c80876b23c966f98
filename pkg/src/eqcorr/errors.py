"""Exception types raised across the package.

Every error carries a short machine-greppable ``code`` used by the CLI to
produce single-line diagnostics (``error[<code>]: message``).
"""
from __future__ import annotations


class EqcorrError(Exception):
    """Base class for all package errors."""

    code = "internal"


class DataError(EqcorrError):
    """Malformed input data (unparseable cell, bad header, duplicate dates)."""

    code = "data"


class EmptyUniverseError(DataError):
    """No tickers survive validation/filtering."""

    code = "empty_universe"


class InsufficientDataError(DataError):
    """Too few rows for the requested operation."""

    code = "insufficient_data"


class WindowError(EqcorrError):
    """A requested train/test window is not covered by the data."""

    code = "window"


class EstimationError(EqcorrError):
    """An estimator produced a non-finite or invalid quantity."""

    code = "estimation"


class DegenerateUniverseError(EqcorrError):
    """The asset universe is too small for the requested construct."""

    code = "degenerate_universe"


class ModelSpecError(EqcorrError):
    """Invalid model specification (unknown combo, wrong hyperparameter arity)."""

    code = "model_spec"


class InfeasibleError(EqcorrError):
    """The constraint set admits no feasible portfolio."""

    code = "infeasible"


class NumericError(EqcorrError):
    """A numeric routine failed to produce a usable result."""

    code = "numeric"


class TuningError(EqcorrError):
    """Hyperparameter tuning could not produce a selection."""

    code = "tuning"


class ConfigError(EqcorrError):
    """Invalid CLI/config input."""

    code = "config"


class DegenerateColumnWarning(UserWarning):
    """A data column is constant; dependent statistics were pinned to a default."""

