"""Constrained solver: closed forms, oracle agreement, feasibility handling."""
import numpy as np
import pytest

from eqcorr.errors import DegenerateUniverseError, InfeasibleError
from eqcorr.estimators import ShrinkageEstimate
from eqcorr.models import MODEL_CATALOG, ModelSpec, build
from eqcorr.solver import SolverConfig, brute_force_oracle, solve, starting_points

CONFIG = SolverConfig(max_iter=500, tol=1e-8, n_random_starts=2, seed=0)


def _ident2():
    return ShrinkageEstimate(S=np.eye(2), lam=0.5, method="fixed")


def test_min_variance_floor_slack():
    # S = I, mu = (100.2, 100.1), floor 0.148: the unconstrained minimum
    # (0.5, 0.5) earns 0.15 > 0.148, so it stands; value w'w = 0.5
    problem = build(ModelSpec("A1", r_min=0.148), np.array([100.2, 100.1]), _ident2())
    got = solve(problem, CONFIG)
    np.testing.assert_allclose(got.w, [0.5, 0.5], atol=1e-4)
    assert got.value == pytest.approx(0.5, abs=1e-6)
    assert got.converged
    assert "return_floor" not in got.active_constraints


def test_min_variance_floor_binding():
    # raising the floor to 0.16 forces w1 >= 0.6; optimum sits on the floor
    problem = build(ModelSpec("A1", r_min=0.16), np.array([100.2, 100.1]), _ident2())
    got = solve(problem, CONFIG)
    np.testing.assert_allclose(got.w, [0.6, 0.4], atol=1e-4)
    assert got.value == pytest.approx(0.52, abs=1e-5)
    assert "return_floor" in got.active_constraints


def test_sharpe_ratio_closed_form():
    # max (0.1 w1 + 0.1)/sqrt(w1^2 + (1-w1)^2) peaks at w1 = 2/3
    problem = build(ModelSpec("A3"), np.array([100.2, 100.1]), _ident2())
    got = solve(problem, CONFIG)
    np.testing.assert_allclose(got.w, [2.0 / 3.0, 1.0 / 3.0], atol=1e-4)


def test_budget_polished_to_machine_precision():
    problem = build(ModelSpec("A1"), np.array([100.3, 100.2]), _ident2())
    got = solve(problem, CONFIG)
    assert abs(got.w.sum() - 1.0) < 1e-12
    assert np.abs(got.w).sum() <= 2.0 + 1e-6


def test_unattainable_floor_rejected_before_iterating():
    # best attainable net return is 1.5*0.1 - 0.5*0.05 = 0.125 < 0.2
    problem = build(ModelSpec("A1", r_min=0.2), np.array([100.1, 100.05]), _ident2())
    with pytest.raises(InfeasibleError, match="unattainable"):
        solve(problem, CONFIG)


def test_deterministic_across_calls():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 9))
    est = ShrinkageEstimate(S=a @ a.T / 9 + 0.1 * np.eye(3), lam=0.5, method="fixed")
    mu = 100.0 + rng.normal(0.2, 0.1, 3)
    problem = build(ModelSpec("D1", lambda1=0.4), mu, est)
    first = solve(problem, CONFIG)
    second = solve(problem, CONFIG)
    np.testing.assert_array_equal(first.w, second.w)
    assert first.value == second.value


def test_starting_points_layout():
    problem = build(ModelSpec("A1"), np.array([100.2, 100.1]), _ident2())
    starts = starting_points(problem, SolverConfig(n_random_starts=3, seed=1))
    # identity covariance: w_eq equals equal weights, so it is not duplicated;
    # equal weights + return-greedy vertex + 3 randoms remain
    assert len(starts) == 5
    np.testing.assert_allclose(starts[0], [0.5, 0.5])
    # the vertex tilts toward the higher-mean first asset, up to the cap
    np.testing.assert_allclose(starts[1], [1.5, -0.5])
    for s in starts:
        assert abs(s.sum() - 1.0) < 1e-9
        assert np.abs(s).sum() <= 2.0 + 1e-9


def test_push_to_cap_lands_exactly_on_the_cap():
    from eqcorr.solver import _push_to_cap

    capped = _push_to_cap(np.array([1.2, -0.2]))
    np.testing.assert_allclose(capped, [1.5, -0.5], atol=1e-12)
    assert capped.sum() == pytest.approx(1.0, abs=1e-12)
    # points beyond the cap come back to it along the same ray
    np.testing.assert_allclose(
        _push_to_cap(np.array([2.0, -1.0])), [1.5, -0.5], atol=1e-12
    )
    # equal weights give no direction to scale
    assert _push_to_cap(np.array([0.5, 0.5])) is None


def test_degenerate_sizes_rejected():
    est = ShrinkageEstimate(S=np.eye(1), lam=0.5, method="fixed")
    problem = build(ModelSpec("A1"), np.array([100.2]), est)
    with pytest.raises(DegenerateUniverseError):
        solve(problem, CONFIG)
    est4 = ShrinkageEstimate(S=np.eye(4), lam=0.5, method="fixed")
    problem4 = build(ModelSpec("A1"), np.full(4, 100.2), est4)
    with pytest.raises(DegenerateUniverseError):
        brute_force_oracle(problem4)


def test_oracle_closed_form_case():
    problem = build(ModelSpec("A1", r_min=0.16), np.array([100.2, 100.1]), _ident2())
    got = brute_force_oracle(problem, grid_step=1e-4)
    np.testing.assert_allclose(got.w, [0.6, 0.4], atol=1e-4)


@pytest.mark.parametrize("code", ["A1", "A2", "B1", "C1", "D2"])
def test_solver_beats_or_matches_grid_oracle(code):
    arity = MODEL_CATALOG[code][2]
    for seed in range(3):
        rng = np.random.default_rng(1000 + seed)
        d = 2 if seed % 2 == 0 else 3
        a = rng.standard_normal((d, 4 * d))
        est = ShrinkageEstimate(S=a @ a.T / (4 * d) + 0.05 * np.eye(d), lam=0.5, method="fixed")
        mu = 100.0 + rng.normal(0.3, 0.1, d)
        spec = ModelSpec(
            code,
            "fixed(0.5)",
            lambda1=0.4 if arity >= 1 else None,
            lambda2=0.3 if arity >= 2 else None,
        )
        problem = build(spec, mu, est)
        iterative = solve(problem, CONFIG)
        oracle = brute_force_oracle(problem, grid_step=1e-2)
        assert iterative.value <= oracle.value + 1e-3


def test_nonconvex_model_multi_start_beats_single_start():
    # multi-start must never do worse than its own first start
    rng = np.random.default_rng(77)
    a = rng.standard_normal((3, 12))
    est = ShrinkageEstimate(S=a @ a.T / 12 + 0.05 * np.eye(3), lam=0.5, method="fixed")
    mu = 100.0 + rng.normal(0.3, 0.1, 3)
    problem = build(ModelSpec("C3", lambda1=0.5), mu, est)
    multi = solve(problem, SolverConfig(n_random_starts=4, seed=3))
    single = solve(problem, SolverConfig(n_random_starts=0, seed=3))
    assert multi.value <= single.value + 1e-9
