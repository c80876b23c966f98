"""Timings for the hot kernels: compiled path vs plain numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
The shapes mirror real use: d=20 selected assets, the 99/99x99 tuning grids,
and a decade of daily returns for the drawdown scan.
"""
from __future__ import annotations

import timeit

import numpy as np

from eqcorr import _kernels


def _spd(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, 2 * d))
    return a @ a.T / (2 * d)


def time_pair(name: str, np_fn, nb_fn, args: tuple, number: int) -> None:
    nb_fn(*args)  # JIT warm-up so compilation is not billed to the timing
    t_np = timeit.timeit(lambda: np_fn(*args), number=number) / number
    t_nb = timeit.timeit(lambda: nb_fn(*args), number=number) / number
    ratio = t_np / t_nb if t_nb > 0 else float("inf")
    print(f"{name:<22} numpy {t_np * 1e6:>9.1f} us   numba {t_nb * 1e6:>9.1f} us   x{ratio:.1f}")


def main() -> None:
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    d = 20
    S = _spd(rng, d)
    w = rng.standard_normal(d)
    w /= w.sum()
    inv_sqrt_diag = 1.0 / np.sqrt(np.diag(S))

    grid1 = rng.standard_normal(99)
    grid2 = rng.standard_normal((99, 99))
    lam = np.round(np.arange(1, 100) * 0.01, 12)
    mask = lam[:, None] + lam[None, :] <= 1.0 + 1e-9
    grid2 = np.where(mask, grid2, 0.0)
    gross = 100.0 + rng.standard_normal(2520)

    print(f"active path: {_kernels.ACTIVE_PATH}")
    time_pair("quad_form", _kernels.quad_form_np, _kernels.quad_form_nb, (S, w), 2000)
    time_pair(
        "corr_mix_value",
        _kernels.corr_mix_value_np,
        _kernels.corr_mix_value_nb,
        (S, w, inv_sqrt_diag),
        2000,
    )
    time_pair(
        "corr_mix_value_grad",
        _kernels.corr_mix_value_grad_np,
        _kernels.corr_mix_value_grad_nb,
        (S, w, inv_sqrt_diag),
        2000,
    )
    time_pair(
        "mean_filter_1d",
        _kernels.mean_filter_1d_np,
        _kernels.mean_filter_1d_nb,
        (grid1, 11),
        2000,
    )
    time_pair(
        "mean_filter_2d",
        _kernels.mean_filter_2d_np,
        _kernels.mean_filter_2d_nb,
        (grid2, mask, 11),
        200,
    )
    time_pair("drawdown", _kernels.drawdown_np, _kernels.drawdown_nb, (gross,), 2000)


if __name__ == "__main__":
    main()
