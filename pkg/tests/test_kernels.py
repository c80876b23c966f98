"""The numba fast path and the numpy fallback must agree bit-for-bit-close."""
import numpy as np
import pytest

from eqcorr import _kernels


def _random_inputs(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 25))
    a = rng.standard_normal((d, 2 * d))
    S = a @ a.T / (2 * d) + 1e-3 * np.eye(d)
    w = rng.standard_normal(d)
    w = w / w.sum() if abs(w.sum()) > 0.1 else np.full(d, 1.0 / d)
    return S, np.sqrt(np.diag(S)) ** -1.0, w


def test_active_path_is_consistent():
    assert _kernels.ACTIVE_PATH in ("numba", "numpy")
    assert (_kernels.ACTIVE_PATH == "numba") == _kernels.USE_NUMBA
    if _kernels.USE_NUMBA:
        assert _kernels.quad_form is _kernels.quad_form_nb
    else:
        assert _kernels.quad_form is _kernels.quad_form_np


def test_quad_form_matches_numpy_expression():
    for seed in range(10):
        S, _, w = _random_inputs(seed)
        assert _kernels.quad_form(S, w) == pytest.approx(float(w @ S @ w), rel=1e-12)


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")
def test_fast_and_fallback_paths_agree():
    for seed in range(20):
        S, isd, w = _random_inputs(seed)
        assert _kernels.quad_form_nb(S, w) == pytest.approx(
            _kernels.quad_form_np(S, w), rel=1e-12
        )
        v_nb, g_nb = _kernels.corr_mix_value_grad_nb(S, isd, w)
        v_np, g_np = _kernels.corr_mix_value_grad_np(S, isd, w)
        assert v_nb == pytest.approx(v_np, rel=1e-12)
        np.testing.assert_allclose(g_nb, g_np, rtol=1e-10, atol=1e-14)
        assert _kernels.corr_mix_value_nb(S, isd, w) == pytest.approx(v_np, rel=1e-12)

    # the jit path sums sequentially, numpy pairwise: allow summation-order noise
    rng = np.random.default_rng(99)
    v = rng.standard_normal(37)
    for window in (1, 3, 11, 37):
        np.testing.assert_allclose(
            _kernels.mean_filter_1d_nb(v, window),
            _kernels.mean_filter_1d_np(v, window),
            rtol=1e-12,
            atol=1e-12,
        )

    grid = rng.standard_normal((23, 23))
    mask = rng.random((23, 23)) > 0.3
    grid = np.where(mask, grid, 0.0)
    for window in (3, 11):
        a = _kernels.mean_filter_2d_nb(grid, mask, window)
        b = _kernels.mean_filter_2d_np(grid, mask, window)
        np.testing.assert_array_equal(np.isnan(a), np.isnan(b))
        np.testing.assert_allclose(a[mask], b[mask], rtol=1e-12, atol=1e-12)

    gross = 100.0 + rng.normal(0, 1, 500)
    np.testing.assert_allclose(
        _kernels.drawdown_nb(gross), _kernels.drawdown_np(gross), rtol=1e-12, atol=1e-12
    )


def test_drawdown_shapes_and_sign():
    rng = np.random.default_rng(3)
    gross = 100.0 + rng.normal(0, 1, 300)
    dd = _kernels.drawdown_core(gross)
    assert dd.shape == gross.shape
    assert np.all(dd <= 1e-12)
