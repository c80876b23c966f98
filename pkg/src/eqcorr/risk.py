"""Correlation-balance measures built on a shrunk covariance S.

For a portfolio w, the correlation vector holds the correlation of the
portfolio's return with each asset:

    corr_vec(w)_i = (S w)_i / (sqrt(w' S w) * sqrt(S_ii)).

The equal-correlation portfolio w_eq makes every entry of that vector equal;
it solves S x = sqrt(diag(S)) and normalizes x to sum one.  Two penalties
measure how far a portfolio is from that balance:

* d_eq_sq(w)     = ||w - w_eq||^2 (squared distance in weight space);
* sigma_rho_sq(w) = population variance (1/d) of corr_vec(w), evaluated via
  the quadratic form with y = diag(S)^(-1/2) S w and centering y - mean(y),
  which is scale-invariant in both S and w.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import NumericError
from .estimators import ShrinkageEstimate


def _cov_parts(est) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(est, ShrinkageEstimate):
        return est.S, est.inv_sqrt_diag
    S = np.asarray(est, dtype=np.float64)
    diag = np.diag(S)
    if np.any(diag <= 0):
        raise NumericError("covariance diagonal must be positive")
    return S, 1.0 / np.sqrt(diag)


def corr_vec(w: np.ndarray, est) -> np.ndarray:
    """Correlations between the portfolio return and each asset return."""
    S, inv_sqrt_diag = _cov_parts(est)
    w = np.asarray(w, dtype=np.float64)
    Sw = S @ w
    total = float(w @ Sw)
    if total <= 0.0:
        raise NumericError("portfolio variance must be positive for correlations")
    return Sw * inv_sqrt_diag / np.sqrt(total)


def equal_corr_weights(est) -> np.ndarray:
    """Fully-invested weights whose correlation vector is constant.

    Solves S x = sqrt(diag(S)) (a linear solve, never an explicit inverse)
    and rescales to sum one.
    """
    S, inv_sqrt_diag = _cov_parts(est)
    std = 1.0 / inv_sqrt_diag
    try:
        x = np.linalg.solve(S, std)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"equal-correlation solve failed: {exc}") from None
    total = float(x.sum())
    if abs(total) < 1e-12:
        raise NumericError("equal-correlation weights do not normalize (sum ~ 0)")
    return x / total


def d_eq_sq(w: np.ndarray, est, weq: np.ndarray | None = None) -> float:
    """Squared Euclidean distance to the equal-correlation portfolio."""
    if weq is None:
        weq = equal_corr_weights(est)
    diff = np.asarray(w, dtype=np.float64) - weq
    return float(diff @ diff)


def gradient_d_eq_sq(w: np.ndarray, est, weq: np.ndarray | None = None) -> np.ndarray:
    if weq is None:
        weq = equal_corr_weights(est)
    return 2.0 * (np.asarray(w, dtype=np.float64) - weq)


def sigma_rho_sq(w: np.ndarray, est) -> float:
    """Population variance (1/d) of the correlation vector."""
    S, inv_sqrt_diag = _cov_parts(est)
    return float(
        _kernels.corr_mix_value(S, inv_sqrt_diag, np.asarray(w, dtype=np.float64))
    )


def gradient_sigma_rho_sq(w: np.ndarray, est) -> np.ndarray:
    """Analytic gradient of :func:`sigma_rho_sq` (quotient rule)."""
    S, inv_sqrt_diag = _cov_parts(est)
    _, grad = _kernels.corr_mix_value_grad(
        S, inv_sqrt_diag, np.asarray(w, dtype=np.float64)
    )
    return grad


def min_variance_weights(est) -> np.ndarray:
    """Fully-invested minimum-variance weights (S x = 1, normalized)."""
    S, _ = _cov_parts(est)
    ones = np.ones(S.shape[0])
    try:
        x = np.linalg.solve(S, ones)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"min-variance solve failed: {exc}") from None
    total = float(x.sum())
    if abs(total) < 1e-12:
        raise NumericError("min-variance weights do not normalize (sum ~ 0)")
    return x / total


def project_leverage(w: np.ndarray, cap: float = 2.0) -> np.ndarray:
    """Shrink a fully-invested portfolio toward equal weights until its L1
    norm fits the cap; the budget (sum = 1) is preserved exactly."""
    w = np.asarray(w, dtype=np.float64)
    if np.abs(w).sum() <= cap:
        return w
    equal = np.full_like(w, 1.0 / len(w))
    lo, hi = 0.0, 1.0  # fraction of w kept; equal weights have L1 = 1 < cap
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if np.abs(mid * w + (1.0 - mid) * equal).sum() <= cap:
            lo = mid
        else:
            hi = mid
    return lo * w + (1.0 - lo) * equal
