"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The optimizer, the tuning grid, and the analytics all funnel their inner-loop
array math through this module.  When numba is importable the kernels are
JIT-compiled; setting ``EQCORR_DISABLE_NUMBA=1`` in the environment (or running
without numba installed) selects the pure-numpy implementations instead.  Both
paths implement identical math and share one test suite;
``benchmarks/bench_kernels.py`` times them against each other.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via EQCORR_DISABLE_NUMBA

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap

    HAS_NUMBA = False


def _numba_disabled() -> bool:
    return os.environ.get("EQCORR_DISABLE_NUMBA", "").strip().lower() in {
        "1",
        "true",
        "yes",
        "on",
    }


USE_NUMBA = HAS_NUMBA and not _numba_disabled()
ACTIVE_PATH = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def quad_form_np(S: np.ndarray, w: np.ndarray) -> float:
    """w' S w."""
    return float(w @ S @ w)


def corr_mix_value_np(S: np.ndarray, inv_sqrt_diag: np.ndarray, w: np.ndarray) -> float:
    """Population variance of the portfolio-to-asset correlation vector.

    With y = diag(S)^(-1/2) S w, returns (1/d)*||y - mean(y)||^2 / (w' S w).
    """
    Sw = S @ w
    den = float(w @ Sw)
    y = inv_sqrt_diag * Sw
    c = y - y.mean()
    num = float(c @ c) / w.shape[0]
    return num / den


def corr_mix_value_grad_np(
    S: np.ndarray, inv_sqrt_diag: np.ndarray, w: np.ndarray
) -> tuple[float, np.ndarray]:
    """Value and analytic gradient of :func:`corr_mix_value_np`.

    Quotient rule on N(w)/D(w) with N = (1/d)||C y||^2, D = w'Sw:
    grad N = (2/d) S diag(S)^(-1/2) (y - mean(y)), grad D = 2 S w.
    """
    d = w.shape[0]
    Sw = S @ w
    den = float(w @ Sw)
    y = inv_sqrt_diag * Sw
    c = y - y.mean()
    num = float(c @ c) / d
    grad_num = (2.0 / d) * (S @ (inv_sqrt_diag * c))
    grad = (grad_num * den - num * (2.0 * Sw)) / (den * den)
    return num / den, grad


def mean_filter_1d_np(v: np.ndarray, window: int) -> np.ndarray:
    """Mean over the `window` nearest entries; windows shift inward at edges."""
    n = v.shape[0]
    h = window // 2
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        start = min(max(i - h, 0), n - window)
        out[i] = v[start : start + window].mean()
    return out


def mean_filter_2d_np(values: np.ndarray, mask: np.ndarray, window: int) -> np.ndarray:
    """Masked mean filter with clipped square neighborhoods.

    Masked-out cells are never read and stay NaN in the output.  Feasible
    cells may legitimately hold +inf (failed evaluations), which rules out
    prefix-sum shortcuts; each clipped window is averaged directly.
    """
    n1, n2 = values.shape
    h = window // 2
    out = np.full((n1, n2), np.nan)
    for i in range(n1):
        a0 = max(i - h, 0)
        a1 = min(i + h + 1, n1)
        for j in range(n2):
            if not mask[i, j]:
                continue
            b0 = max(j - h, 0)
            b1 = min(j + h + 1, n2)
            block_mask = mask[a0:a1, b0:b1]
            if block_mask.any():
                out[i, j] = values[a0:a1, b0:b1][block_mask].mean()
    return out


def drawdown_np(gross: np.ndarray) -> np.ndarray:
    """Drawdown in percent of a gross-return series, cumulated from 1.0."""
    path = np.cumprod(gross / 100.0)
    peak = np.maximum.accumulate(path)
    return (path - peak) / peak * 100.0


# ---------------------------------------------------------------------------
# numba implementations (same math, explicit loops where it pays off)
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def quad_form_nb(S, w):  # pragma: no cover - thin jit wrapper
        d = w.shape[0]
        acc = 0.0
        for i in range(d):
            row = 0.0
            for j in range(d):
                row += S[i, j] * w[j]
            acc += w[i] * row
        return acc

    @njit(cache=True)
    def _corr_mix_core_nb(S, inv_sqrt_diag, w):  # pragma: no cover
        d = w.shape[0]
        Sw = np.empty(d)
        den = 0.0
        for i in range(d):
            row = 0.0
            for j in range(d):
                row += S[i, j] * w[j]
            Sw[i] = row
            den += w[i] * row
        ybar = 0.0
        for i in range(d):
            ybar += inv_sqrt_diag[i] * Sw[i]
        ybar /= d
        c = np.empty(d)
        num = 0.0
        for i in range(d):
            ci = inv_sqrt_diag[i] * Sw[i] - ybar
            c[i] = ci
            num += ci * ci
        num /= d
        return Sw, c, num, den

    @njit(cache=True)
    def corr_mix_value_nb(S, inv_sqrt_diag, w):  # pragma: no cover
        _, _, num, den = _corr_mix_core_nb(S, inv_sqrt_diag, w)
        return num / den

    @njit(cache=True)
    def corr_mix_value_grad_nb(S, inv_sqrt_diag, w):  # pragma: no cover
        d = w.shape[0]
        Sw, c, num, den = _corr_mix_core_nb(S, inv_sqrt_diag, w)
        grad = np.empty(d)
        for i in range(d):
            gn = 0.0
            for j in range(d):
                gn += S[i, j] * (inv_sqrt_diag[j] * c[j])
            gn *= 2.0 / d
            grad[i] = (gn * den - num * 2.0 * Sw[i]) / (den * den)
        return num / den, grad

    @njit(cache=True)
    def mean_filter_1d_nb(v, window):  # pragma: no cover
        n = v.shape[0]
        h = window // 2
        out = np.empty(n)
        for i in range(n):
            start = min(max(i - h, 0), n - window)
            acc = 0.0
            for j in range(start, start + window):
                acc += v[j]
            out[i] = acc / window
        return out

    @njit(cache=True)
    def mean_filter_2d_nb(values, mask, window):  # pragma: no cover
        n1, n2 = values.shape
        h = window // 2
        out = np.full((n1, n2), np.nan)
        for i in range(n1):
            a0 = max(i - h, 0)
            a1 = min(i + h + 1, n1)
            for j in range(n2):
                if not mask[i, j]:
                    continue
                b0 = max(j - h, 0)
                b1 = min(j + h + 1, n2)
                acc = 0.0
                cnt = 0
                for a in range(a0, a1):
                    for b in range(b0, b1):
                        if mask[a, b]:
                            acc += values[a, b]
                            cnt += 1
                if cnt > 0:
                    out[i, j] = acc / cnt
        return out

    @njit(cache=True)
    def drawdown_nb(gross):  # pragma: no cover
        n = gross.shape[0]
        out = np.empty(n)
        path = 1.0
        peak = 0.0
        for t in range(n):
            path *= gross[t] / 100.0
            if path > peak:
                peak = path
            out[t] = (path - peak) / peak * 100.0
        return out


if USE_NUMBA:
    quad_form = quad_form_nb
    corr_mix_value = corr_mix_value_nb
    corr_mix_value_grad = corr_mix_value_grad_nb
    mean_filter_1d_core = mean_filter_1d_nb
    mean_filter_2d_core = mean_filter_2d_nb
    drawdown_core = drawdown_nb
else:
    quad_form = quad_form_np
    corr_mix_value = corr_mix_value_np
    corr_mix_value_grad = corr_mix_value_grad_np
    mean_filter_1d_core = mean_filter_1d_np
    mean_filter_2d_core = mean_filter_2d_np
    drawdown_core = drawdown_np
