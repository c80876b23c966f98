"""Moments, shrinkage intensities, and rank correlations.

The SC and USCC intensities are checked against deliberately naive loop
implementations written here, and rank correlations against scipy.
"""
import numpy as np
import pytest
from scipy.stats import spearmanr

from eqcorr.errors import (
    DegenerateColumnWarning,
    DegenerateUniverseError,
    EstimationError,
    InsufficientDataError,
)
from eqcorr.estimators import (
    LAMBDA_MIN,
    constant_correlation_target,
    estimate_covariance,
    parse_cov_method,
    sample_cov,
    sample_mean,
    shrink,
    spearman_matrix,
)


def test_sample_mean_and_cov_tiny_case():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_allclose(sample_mean(x), [2.0, 3.0])
    # centered rows (-1,-1),(1,1); 1/N covariance with N=2 is all ones
    np.testing.assert_allclose(sample_cov(x), [[1.0, 1.0], [1.0, 1.0]])


def test_sample_cov_is_population_convention():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((37, 4))
    np.testing.assert_allclose(sample_cov(x), np.cov(x.T, ddof=0), rtol=1e-12)
    with pytest.raises(InsufficientDataError):
        sample_cov(x[:1])


def test_constant_correlation_target_structure():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((60, 5))
    cov = sample_cov(x)
    target = constant_correlation_target(cov)
    np.testing.assert_allclose(np.diag(target), np.diag(cov), rtol=1e-14)
    std = np.sqrt(np.diag(cov))
    corr_t = target / np.outer(std, std)
    off = ~np.eye(5, dtype=bool)
    # every off-diagonal correlation equals the average sample correlation
    corr_s = cov / np.outer(std, std)
    rbar = corr_s[off].mean()
    np.testing.assert_allclose(corr_t[off], rbar, rtol=1e-12)
    with pytest.raises(DegenerateUniverseError):
        constant_correlation_target(cov[:1, :1])


def _naive_sc_intensity(x):
    """Textbook constant-correlation intensity, all explicit loops."""
    t, d = x.shape
    x = x - x.mean(axis=0)
    s = x.T @ x / t
    std = np.sqrt(np.diag(s))
    corr = s / np.outer(std, std)
    rbar = (corr.sum() - d) / (d * (d - 1))

    phi = 0.0
    for i in range(d):
        for j in range(d):
            phi += np.mean((x[:, i] * x[:, j] - s[i, j]) ** 2)

    rho = 0.0
    for i in range(d):
        rho += np.mean((x[:, i] * x[:, i] - s[i, i]) ** 2)
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            theta_ii_ij = np.mean((x[:, i] ** 2 - s[i, i]) * (x[:, i] * x[:, j] - s[i, j]))
            rho += rbar * np.sqrt(s[j, j] / s[i, i]) * theta_ii_ij

    prior = rbar * np.outer(std, std)
    np.fill_diagonal(prior, np.diag(s))
    gamma = ((s - prior) ** 2).sum()
    return (phi - rho) / gamma / t


def _naive_uscc_intensity(x):
    """Pairwise-loop unbiased-correlation intensity."""
    n, d = x.shape
    z = (x - x.mean(axis=0)) / x.std(axis=0, ddof=1)
    r = np.eye(d)
    var_r = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            w = z[:, i] * z[:, j]
            r[i, j] = w.sum() / (n - 1)
            var_r[i, j] = n / (n - 1) ** 3 * ((w - w.mean()) ** 2).sum()
    off = ~np.eye(d, dtype=bool)
    rbar = r[off].mean()
    return var_r[off].sum() / ((r[off] - rbar) ** 2).sum()


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_sc_intensity_matches_naive_loops(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((120, 6)) * rng.uniform(0.5, 2.0, size=6)
    est = estimate_covariance(x, "SC")
    expected = float(np.clip(_naive_sc_intensity(x), LAMBDA_MIN, 1 - LAMBDA_MIN))
    assert est.lam == pytest.approx(expected, rel=1e-10)
    assert est.method == "SC"


@pytest.mark.parametrize("seed", [5, 6, 7, 8, 9])
def test_uscc_intensity_matches_naive_loops(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((90, 5)) * rng.uniform(0.5, 2.0, size=5)
    est = estimate_covariance(x, "USCC")
    expected = float(np.clip(_naive_uscc_intensity(x), LAMBDA_MIN, 1 - LAMBDA_MIN))
    assert est.lam == pytest.approx(expected, rel=1e-10)
    assert est.method == "USCC"


def test_shrunk_matrix_is_the_announced_blend():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((80, 4))
    cov = sample_cov(x)
    target = constant_correlation_target(cov)
    est = shrink(cov, target, "SC", train=x)
    np.testing.assert_allclose(
        est.S, (1 - est.lam) * cov + est.lam * target, rtol=1e-12
    )
    assert est.is_positive_definite()
    assert not est.repaired


def test_fixed_method_and_clipping():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((50, 3))
    cov = sample_cov(x)
    target = constant_correlation_target(cov)
    assert shrink(cov, target, "fixed", fixed_lambda=0.3).lam == 0.3
    assert shrink(cov, target, "fixed(0.3)").lam == 0.3
    # intensities are clipped into [0.01, 0.99]
    assert shrink(cov, target, "fixed", fixed_lambda=0.0).lam == LAMBDA_MIN
    assert shrink(cov, target, "fixed", fixed_lambda=1.0).lam == 1 - LAMBDA_MIN
    with pytest.raises(EstimationError):
        shrink(cov, target, "fixed")


def test_parse_cov_method():
    assert parse_cov_method("SC") == ("SC", None)
    assert parse_cov_method("USCC") == ("USCC", None)
    assert parse_cov_method("fixed(0.25)") == ("fixed", 0.25)
    with pytest.raises(EstimationError):
        parse_cov_method("LW")


def test_two_assets_sample_equals_target():
    # with d = 2 the average correlation is the only correlation, so the
    # target equals the sample and any intensity returns the same matrix
    rng = np.random.default_rng(12)
    x = rng.standard_normal((40, 2))
    cov = sample_cov(x)
    target = constant_correlation_target(cov)
    np.testing.assert_allclose(target, cov, rtol=1e-12)
    est = estimate_covariance(x, "SC")
    np.testing.assert_allclose(est.S, cov, rtol=1e-12)


def test_singular_blend_is_repaired():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])  # rank one
    est = shrink(cov, cov, "fixed", fixed_lambda=0.5)
    assert est.repaired
    assert est.is_positive_definite()


def test_spearman_frozen_example():
    # columns (1,2,3,4) and (1,3,2,4): rank correlation 0.8 exactly
    x = np.array([[1.0, 1.0], [2.0, 3.0], [3.0, 2.0], [4.0, 4.0]])
    rho = spearman_matrix(x)
    assert rho[0, 1] == pytest.approx(0.8, abs=1e-12)
    np.testing.assert_allclose(np.diag(rho), 1.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_spearman_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((50, 6))
    rho = spearman_matrix(x)
    expected = spearmanr(x).statistic
    np.testing.assert_allclose(rho, expected, atol=1e-12)


def test_spearman_ties_use_average_ranks():
    rng = np.random.default_rng(3)
    x = rng.integers(0, 4, size=(60, 5)).astype(float)  # heavy ties
    rho = spearman_matrix(x)
    expected = spearmanr(x).statistic
    np.testing.assert_allclose(rho, expected, atol=1e-12)


def test_spearman_constant_column_pins_zero_and_warns():
    x = np.column_stack([np.arange(10.0), np.full(10, 7.0)])
    with pytest.warns(DegenerateColumnWarning):
        rho = spearman_matrix(x)
    assert rho[0, 1] == 0.0
    assert rho[1, 1] == 1.0
    with pytest.raises(InsufficientDataError):
        spearman_matrix(x[:2])
