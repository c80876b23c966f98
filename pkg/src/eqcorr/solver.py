"""Constrained minimization over fully-invested, leverage-capped portfolios.

The feasible set is  { w : sum(w) = 1, ||w||_1 <= 2 }  plus any model-specific
inequalities.  The L1 cap is handled exactly by splitting w = u - v with
u, v >= 0, sum(u - v) = 1, sum(u + v) <= 2, and a trust-region constrained
method runs from several deterministic starts (equal weights, the projected
equal-correlation portfolio, then seeded random feasible points); the best
feasible candidate wins, ties resolved by start order.

`brute_force_oracle` is an intentionally naive grid scan over the same
feasible set for d in {2, 3}; it exists so the iterative path can be checked
against an independent one.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import BFGS, Bounds, LinearConstraint, NonlinearConstraint, minimize

from .errors import DegenerateUniverseError, InfeasibleError, NumericError
from .models import LEVERAGE_CAP, ObjectiveProblem
from .risk import project_leverage

BUDGET_TOL = 1e-8
EXTRA_TOL = 1e-6
_BIG = 1e100  # stands in for +inf inside the iterative method


@dataclass(frozen=True)
class SolverConfig:
    """Iteration/termination knobs surfaced in the CLI config."""

    max_iter: int = 500
    tol: float = 1e-6
    n_random_starts: int = 3
    seed: int = 0


@dataclass(frozen=True)
class SolveReport:
    w: np.ndarray
    value: float
    iterations: int
    converged: bool
    starts_used: int
    active_constraints: tuple[str, ...]


def _active_constraints(problem: ObjectiveProblem, w: np.ndarray) -> tuple[str, ...]:
    # diagnostic only: "active" means within the solver's terminal precision,
    # which is looser than the feasibility tolerance
    names = ["budget"]
    if np.abs(w).sum() >= LEVERAGE_CAP - 1e-5:
        names.append("leverage")
    for c in problem.constraints:
        if c.fun(w) >= -1e-5:
            names.append(c.name)
    return tuple(names)


def _feasible(problem: ObjectiveProblem, w: np.ndarray) -> bool:
    if abs(float(w.sum()) - 1.0) > BUDGET_TOL:
        return False
    if np.abs(w).sum() > LEVERAGE_CAP + EXTRA_TOL:
        return False
    return all(c.fun(w) <= EXTRA_TOL for c in problem.constraints)


def starting_points(problem: ObjectiveProblem, config: SolverConfig) -> list[np.ndarray]:
    """Equal weights, projected equal-correlation weights, the return-greedy
    leverage vertex, then seeded randoms."""
    d = problem.d
    equal = np.full(d, 1.0 / d)
    starts = [equal]
    if problem.weq is not None and np.all(np.isfinite(problem.weq)):
        cand = project_leverage(problem.weq, LEVERAGE_CAP)
        if not np.allclose(cand, equal, atol=1e-12):
            starts.append(cand)
    if problem.mu is not None and d >= 2:
        # the vertex maximizing mu'w over the capped simplex; it is the most
        # feasible point for a linear return floor and seeds the basin that
        # ratio objectives favor when all expected returns are poor
        imax = int(np.argmax(problem.mu))
        imin = int(np.argmin(problem.mu))
        if imax != imin:
            vertex = np.zeros(d)
            vertex[imax] = (LEVERAGE_CAP + 1.0) / 2.0
            vertex[imin] = 1.0 - vertex[imax]
            starts.append(vertex)
    rng = np.random.default_rng(config.seed)
    for _ in range(config.n_random_starts):
        z = rng.standard_normal(d)
        cand = equal + 0.5 * (z - z.mean())
        starts.append(project_leverage(cand, LEVERAGE_CAP))
    return starts


def _push_to_cap(w: np.ndarray, cap: float = LEVERAGE_CAP) -> np.ndarray | None:
    """Budget-preserving point on the leverage cap along the ray from equal
    weights through w; None when w offers no direction to scale.

    Barrier methods approach a solution that sits exactly on the cap from
    strictly inside and can terminate early; evaluating the capped point as
    an extra candidate recovers that last stretch at the cost of one
    objective evaluation.
    """
    d = w.size
    base = np.full(d, 1.0 / d)
    direction = w - base
    spread = float(np.abs(direction).sum())
    if spread <= 1e-12:
        return None

    def leverage(alpha: float) -> float:
        return float(np.abs(base + alpha * direction).sum())

    hi = (cap + 1.0) / spread + 1.0  # |.|_1 >= alpha*spread - 1 > cap there
    if leverage(hi) <= cap:
        return None
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if leverage(mid) < cap:
            lo = mid
        else:
            hi = mid
    return base + hi * direction


def _check_linear_feasibility(problem: ObjectiveProblem) -> None:
    """Linear floors have a closed-form best value over the L1-capped simplex:
    1.5 * max(a) - 0.5 * min(a).  Reject unattainable floors up front."""
    for c in problem.constraints:
        if c.linear is None:
            continue
        a, lb = c.linear
        best = 1.5 * float(a.max()) - 0.5 * float(a.min())
        if best < lb - 1e-9:
            raise InfeasibleError(
                f"constraint {c.name} unattainable: best achievable "
                f"{best - 100.0:.6f} is below the floor {lb - 100.0:.6f}"
            )


def solve(problem: ObjectiveProblem, config: SolverConfig | None = None) -> SolveReport:
    """Best feasible local minimum across the multi-start sweep."""
    config = config or SolverConfig()
    d = problem.d
    if d < 2:
        raise DegenerateUniverseError("solver needs at least two assets")
    _check_linear_feasibility(problem)

    ones = np.ones(d)
    scipy_constraints = [
        LinearConstraint(np.concatenate([ones, -ones]), 1.0, 1.0),
        LinearConstraint(np.ones(2 * d), -np.inf, LEVERAGE_CAP),
    ]
    for c in problem.constraints:
        if c.linear is not None:
            a, lb = c.linear
            scipy_constraints.append(
                LinearConstraint(np.concatenate([a, -a]), lb, np.inf)
            )
        else:
            def split_fun(z, _c=c):
                return _c.fun(z[:d] - z[d:])

            def split_jac(z, _c=c):
                g = _c.grad(z[:d] - z[d:])
                return np.concatenate([g, -g])[None, :]

            scipy_constraints.append(
                NonlinearConstraint(split_fun, -np.inf, 0.0, jac=split_jac)
            )

    def fun(z):
        v = problem.value(z[:d] - z[d:])
        return float(v) if np.isfinite(v) else _BIG

    def jac(z):
        g = problem.gradient(z[:d] - z[d:])
        return np.concatenate([g, -g])

    split_hessian = None
    if problem.hessian is not None:
        H = problem.hessian
        split_hessian = np.block([[H, -H], [-H, H]])

    bounds = Bounds(0.0, np.inf)
    starts = starting_points(problem, config)
    candidates = []
    for idx, w0 in enumerate(starts):
        z0 = np.concatenate([np.clip(w0, 0.0, None), np.clip(-w0, 0.0, None)])
        hess = (lambda z, _H=split_hessian: _H) if split_hessian is not None else BFGS()
        try:
            with warnings.catch_warnings():
                # expected whenever a blend objective is locally linear (tiny
                # risk weight); the BFGS approximation is still the right tool
                warnings.filterwarnings("ignore", message="delta_grad == 0.0.*")
                res = minimize(
                    fun,
                    z0,
                    method="trust-constr",
                    jac=jac,
                    hess=hess,
                    bounds=bounds,
                    constraints=scipy_constraints,
                    options={
                        "maxiter": config.max_iter,
                        "gtol": config.tol,
                        "xtol": 1e-12,
                        "verbose": 0,
                    },
                )
        except (ValueError, np.linalg.LinAlgError):
            continue
        w = res.x[:d] - res.x[d:]
        total = float(w.sum())
        if total != 0.0 and abs(total - 1.0) <= 1e-6:
            w = w / total  # polish the budget to machine precision
        value = problem.value(w)
        if not np.isfinite(value):
            continue
        candidates.append(
            (float(value), idx, w, int(res.niter), res.status in (1, 2), _feasible(problem, w))
        )
        capped = _push_to_cap(w)
        if capped is not None:
            cap_value = problem.value(capped)
            if np.isfinite(cap_value) and cap_value < value:
                candidates.append(
                    (
                        float(cap_value),
                        idx,
                        capped,
                        int(res.niter),
                        res.status in (1, 2),
                        _feasible(problem, capped),
                    )
                )

    usable = [c for c in candidates if c[5]]
    if not usable:
        if problem.constraints:
            raise InfeasibleError(
                f"no feasible portfolio found for {problem.name}; "
                "the extra constraints appear to conflict"
            )
        raise NumericError(f"no start converged to a feasible portfolio for {problem.name}")
    value, _, w, niter, clean, _ = min(usable, key=lambda c: (c[0], c[1]))
    return SolveReport(
        w=w,
        value=float(value),
        iterations=niter,
        converged=bool(clean),
        starts_used=len(starts),
        active_constraints=_active_constraints(problem, w),
    )


def brute_force_oracle(problem: ObjectiveProblem, grid_step: float = 1e-2) -> SolveReport:
    """Exhaustive scan of the feasible set on a regular grid (d = 2 or 3).

    Deliberately dumb and independent of the iterative path: enumerate,
    filter by the constraints, take the first strict minimum.
    """
    d = problem.d
    if grid_step <= 0:
        raise NumericError("grid_step must be positive")
    best_v = np.inf
    best_w = None
    evals = 0
    n = int(round(2.0 / grid_step))
    if d == 2:
        for i in range(n + 1):
            w1 = -0.5 + i * grid_step
            w = np.array([w1, 1.0 - w1])
            if any(c.fun(w) > 1e-9 for c in problem.constraints):
                continue
            v = float(problem.value(w))
            evals += 1
            if v < best_v:
                best_v, best_w = v, w
    elif d == 3:
        for i in range(n + 1):
            w1 = -0.5 + i * grid_step
            for j in range(n + 1):
                w2 = -0.5 + j * grid_step
                w3 = 1.0 - w1 - w2
                if abs(w1) + abs(w2) + abs(w3) > LEVERAGE_CAP + 1e-12:
                    continue
                w = np.array([w1, w2, w3])
                if any(c.fun(w) > 1e-9 for c in problem.constraints):
                    continue
                v = float(problem.value(w))
                evals += 1
                if v < best_v:
                    best_v, best_w = v, w
    else:
        raise DegenerateUniverseError("grid oracle supports d in {2, 3} only")
    if best_w is None or not np.isfinite(best_v):
        raise InfeasibleError("no feasible grid point")
    return SolveReport(
        w=best_w,
        value=best_v,
        iterations=evals,
        converged=True,
        starts_used=0,
        active_constraints=_active_constraints(problem, best_w),
    )
