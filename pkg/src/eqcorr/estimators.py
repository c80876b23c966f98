"""Moment estimation and shrinkage toward a constant-correlation target.

The covariance everywhere downstream is the shrunk matrix

    S = (1 - lam) * Cov + lam * F

where Cov is the 1/N sample covariance, F keeps Cov's diagonal and replaces
every off-diagonal with the average correlation, and lam comes from one of
three methods:

* ``SC``   - the Ledoit-Wolf constant-correlation intensity (pi/rho/gamma
  asymptotics of the sample covariance entries, lam = kappa/N);
* ``USCC`` - an unbiased-sample-correlation intensity: correlations and their
  variance estimates are formed with ddof=1 conventions from standardized
  columns, lam* = sum Var(r_ij) / sum (r_ij - rbar)^2 over i != j.  Because
  Cov and F share a diagonal, shrinking correlations toward their mean by
  lam* is identical to the covariance-level blend above with the same lam*;
* ``fixed(lam)`` - an explicit override so downstream stages can be tested
  independently of estimation noise.

All intensities are clipped into [0.01, 0.99].  If the blend is not positive
definite (possible with rank-deficient inputs), a small ridge eps*I with
eps = 1e-8 * trace/d is added, escalating tenfold until Cholesky succeeds,
and the estimate is flagged as repaired.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateColumnWarning,
    DegenerateUniverseError,
    EstimationError,
    InsufficientDataError,
)
from .market_data import ReturnsPanel

LAMBDA_MIN = 0.01
COV_METHODS = ("SC", "USCC", "fixed")


@dataclass
class ShrinkageEstimate:
    """Shrunk covariance plus the intensity and method that produced it."""

    S: np.ndarray
    lam: float
    method: str
    repaired: bool = False

    @property
    def d(self) -> int:
        return self.S.shape[0]

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.S))

    @property
    def inv_sqrt_diag(self) -> np.ndarray:
        return 1.0 / self.std

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.S)
            return True
        except np.linalg.LinAlgError:
            return False


def _matrix(train) -> np.ndarray:
    if isinstance(train, ReturnsPanel):
        return train.returns
    x = np.asarray(train, dtype=np.float64)
    if x.ndim != 2:
        raise EstimationError("expected a 2-D observations matrix")
    return x


def sample_mean(train) -> np.ndarray:
    """Column means of the observation matrix."""
    x = _matrix(train)
    if x.shape[0] < 1:
        raise InsufficientDataError("need at least one row for means")
    return x.mean(axis=0)


def sample_cov(train) -> np.ndarray:
    """Sample covariance with 1/N normalization (population convention)."""
    x = _matrix(train)
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least two rows for a covariance")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / n
    return (cov + cov.T) / 2.0


def constant_correlation_target(cov: np.ndarray) -> np.ndarray:
    """Constant-correlation target: same diagonal, averaged off-diagonals."""
    cov = np.asarray(cov, dtype=np.float64)
    d = cov.shape[0]
    if d < 2:
        raise DegenerateUniverseError("constant-correlation target needs d >= 2")
    var = np.diag(cov)
    if np.any(var <= 0):
        raise EstimationError("covariance has a non-positive diagonal entry")
    sqrtvar = np.sqrt(var)
    corr = cov / np.outer(sqrtvar, sqrtvar)
    rbar = (corr.sum() - d) / (d * (d - 1))
    target = rbar * np.outer(sqrtvar, sqrtvar)
    np.fill_diagonal(target, var)
    return target


def _intensity_sc(x: np.ndarray, sample: np.ndarray, prior: np.ndarray) -> float:
    """Ledoit-Wolf constant-correlation intensity, 1/N conventions."""
    t, d = x.shape
    x = x - x.mean(axis=0)
    var = np.diag(sample)
    sqrtvar = np.sqrt(var)

    y = x**2
    phi_mat = y.T @ y / t - sample**2
    phi = phi_mat.sum()

    term1 = (x**3).T @ x / t
    theta_mat = term1 - var[:, None] * sample
    np.fill_diagonal(theta_mat, 0.0)
    corr_off = np.outer(1.0 / sqrtvar, sqrtvar)
    rbar = ((sample / np.outer(sqrtvar, sqrtvar)).sum() - d) / (d * (d - 1))
    rho = np.trace(phi_mat) + rbar * (corr_off * theta_mat).sum()

    gamma = np.linalg.norm(sample - prior, "fro") ** 2
    if gamma <= 0.0:
        # sample already equals the target; any intensity yields the same S
        return 1.0 - LAMBDA_MIN
    kappa = (phi - rho) / gamma
    return kappa / t


def _intensity_uscc(x: np.ndarray) -> float:
    """Unbiased-sample-correlation intensity (ddof=1 conventions)."""
    n, d = x.shape
    centered = x - x.mean(axis=0)
    std = centered.std(axis=0, ddof=1)
    if np.any(std <= 0):
        raise EstimationError("zero-variance column; correlation intensity undefined")
    z = centered / std
    r = z.T @ z / (n - 1)
    off = ~np.eye(d, dtype=bool)
    rbar = r[off].mean()

    # Var(r_ij) from the spread of the per-observation products z_ki * z_kj
    wbar = z.T @ z / n
    sq = (z**2).T @ (z**2)
    sum_sq_dev = sq - 2.0 * wbar * (n * wbar) + n * wbar**2  # sum_k (w_kij - wbar)^2
    var_r = n / (n - 1.0) ** 3 * sum_sq_dev

    denom = ((r - rbar)[off] ** 2).sum()
    if denom <= 1e-300:
        # all off-diagonal correlations equal: Cov == F, S independent of lam
        return 1.0 - LAMBDA_MIN
    return float(var_r[off].sum() / denom)


def parse_cov_method(text: str) -> tuple[str, float | None]:
    """Parse 'SC', 'USCC', or 'fixed(0.3)' into (method, fixed_lambda)."""
    token = text.strip()
    if token in ("SC", "USCC"):
        return token, None
    m = re.fullmatch(r"fixed\(([-+0-9.eE]+)\)", token)
    if m:
        return "fixed", float(m.group(1))
    raise EstimationError(f"unknown covariance method {text!r}")


def shrink(
    cov: np.ndarray,
    target: np.ndarray,
    method: str,
    train=None,
    fixed_lambda: float | None = None,
) -> ShrinkageEstimate:
    """Blend the sample covariance with the constant-correlation target."""
    if method == "fixed" or method.startswith("fixed("):
        if method.startswith("fixed("):
            _, fixed_lambda = parse_cov_method(method)
        if fixed_lambda is None:
            raise EstimationError("fixed shrinkage requires a lambda value")
        lam = float(fixed_lambda)
        label = "fixed"
    elif method in ("SC", "USCC"):
        if train is None:
            raise EstimationError(f"{method} shrinkage needs the training panel")
        x = _matrix(train)
        if x.shape[0] < 2:
            raise InsufficientDataError("need at least two rows for shrinkage")
        lam = _intensity_sc(x, cov, target) if method == "SC" else _intensity_uscc(x)
        label = method
    else:
        raise EstimationError(f"unknown covariance method {method!r}")

    if not np.isfinite(lam):
        raise EstimationError(f"non-finite shrinkage intensity for {method}")
    lam = float(np.clip(lam, LAMBDA_MIN, 1.0 - LAMBDA_MIN))
    S = (1.0 - lam) * np.asarray(cov, dtype=np.float64) + lam * np.asarray(
        target, dtype=np.float64
    )
    S = (S + S.T) / 2.0

    repaired = False
    eps = 1e-8 * np.trace(S) / S.shape[0]
    for _ in range(8):
        try:
            np.linalg.cholesky(S)
            break
        except np.linalg.LinAlgError:
            S = S + eps * np.eye(S.shape[0])
            repaired = True
            eps *= 10.0
    else:
        raise EstimationError("covariance could not be repaired to positive definite")
    return ShrinkageEstimate(S=S, lam=lam, method=label, repaired=repaired)


def estimate_covariance(train, method: str, fixed_lambda: float | None = None) -> ShrinkageEstimate:
    """sample_cov + constant-correlation target + shrink, in one call."""
    cov = sample_cov(train)
    target = constant_correlation_target(cov)
    return shrink(cov, target, method, train=train, fixed_lambda=fixed_lambda)


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..N with ties sharing the average of their positions."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_matrix(train) -> np.ndarray:
    """Rank-correlation matrix with average ranks for ties.

    A constant column has no rank ordering; its correlations are defined as 0
    (diagonal stays 1) and a :class:`DegenerateColumnWarning` is emitted.
    """
    x = _matrix(train)
    n, d = x.shape
    if n < 3:
        raise InsufficientDataError("need at least three rows for rank correlations")
    ranks = np.column_stack([_average_ranks(x[:, j]) for j in range(d)])
    centered = ranks - ranks.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    flat = norms == 0.0
    if flat.any():
        if isinstance(train, ReturnsPanel):
            names = [train.tickers[j] for j in np.flatnonzero(flat)]
        else:
            names = [str(j) for j in np.flatnonzero(flat)]
        warnings.warn(
            f"constant columns have undefined rank correlation, pinned to 0: {names}",
            DegenerateColumnWarning,
            stacklevel=2,
        )
    safe = np.where(flat, 1.0, norms)
    z = centered / safe
    rho = z.T @ z
    rho[flat, :] = 0.0
    rho[:, flat] = 0.0
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)
