"""The eleven constrained portfolio models and their smooth objectives.

Category A uses classical mean/variance/Sharpe criteria; categories B, C and
D add the correlation-balance penalties (distance to the equal-correlation
portfolio, or the variance of the correlation vector).  Within a category:

* type 1 minimizes risk subject to a daily return floor,
* type 2 maximizes a return-minus-risk tradeoff,
* type 3 maximizes a Sharpe-style ratio tradeoff.

Everything is expressed in minimization orientation (maximizations are
negated).  Every model shares the structural constraints sum(w) = 1 and
||w||_1 <= 2; type-1 models add  r_min - (w'mu - 100) <= 0.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import EstimationError, ModelSpecError, NumericError
from .estimators import ShrinkageEstimate, parse_cov_method
from .risk import equal_corr_weights

# code -> (category, type, number of hyperparameters)
MODEL_CATALOG = {
    "A1": ("A", 1, 0),
    "A2": ("A", 2, 1),
    "A3": ("A", 3, 0),
    "B1": ("B", 1, 1),
    "B2": ("B", 2, 2),
    "B3": ("B", 3, 1),
    "C1": ("C", 1, 0),
    "C2": ("C", 2, 1),
    "C3": ("C", 3, 1),
    "D1": ("D", 1, 1),
    "D2": ("D", 2, 2),
}

# 3% monthly compounded over 20 trading days, rounded as commonly quoted
R_MIN_DEFAULT = 0.148

LEVERAGE_CAP = 2.0
VARIANCE_FLOOR = 1e-12


def r_min_from_monthly(monthly_pct: float) -> float:
    """Daily return floor equivalent to a monthly one over 20 trading days."""
    if monthly_pct <= -100.0:
        raise ModelSpecError("monthly return must exceed -100%")
    return 100.0 * ((1.0 + monthly_pct / 100.0) ** (1.0 / 20.0) - 1.0)


@dataclass(frozen=True)
class ModelSpec:
    """A model code plus covariance method and (possibly pending) hyperparameters."""

    code: str
    cov_method: str = "SC"
    lambda1: float | None = None
    lambda2: float | None = None
    r_min: float = R_MIN_DEFAULT

    def __post_init__(self):
        if self.code not in MODEL_CATALOG:
            raise ModelSpecError(f"unknown model code {self.code!r}")
        try:
            parse_cov_method(self.cov_method)
        except EstimationError:
            raise ModelSpecError(
                f"unknown covariance method {self.cov_method!r}"
            ) from None
        arity = self.n_hyperparams
        if arity < 2 and self.lambda2 is not None:
            raise ModelSpecError(f"{self.code} does not take lambda2")
        if arity < 1 and self.lambda1 is not None:
            raise ModelSpecError(f"{self.code} does not take lambda1")
        for lam in (self.lambda1, self.lambda2):
            if lam is not None and not (0.0 <= lam <= 1.0):
                raise ModelSpecError(f"hyperparameters must lie in [0, 1], got {lam}")
        if self.lambda1 is not None and self.lambda2 is not None:
            if self.lambda1 + self.lambda2 > 1.0 + 1e-12:
                raise ModelSpecError("lambda1 + lambda2 must not exceed 1")
        if not np.isfinite(self.r_min):
            raise ModelSpecError("r_min must be finite")

    @property
    def category(self) -> str:
        return MODEL_CATALOG[self.code][0]

    @property
    def mtype(self) -> int:
        return MODEL_CATALOG[self.code][1]

    @property
    def n_hyperparams(self) -> int:
        return MODEL_CATALOG[self.code][2]

    @property
    def has_return_floor(self) -> bool:
        return self.mtype == 1

    @property
    def name(self) -> str:
        return f"{self.code}-{self.cov_method}"

    def with_lambdas(self, lambda1=None, lambda2=None) -> "ModelSpec":
        return replace(self, lambda1=lambda1, lambda2=lambda2)


def parse_model_name(text: str) -> ModelSpec:
    """Parse 'B1-SC', 'D2-USCC', or 'A1-fixed(0.3)' into a ModelSpec."""
    m = re.fullmatch(r"([A-D][123])-(.+)", text.strip())
    if not m:
        raise ModelSpecError(f"cannot parse model name {text!r}")
    return ModelSpec(code=m.group(1), cov_method=m.group(2))


@dataclass(frozen=True)
class Constraint:
    """One inequality g(w) <= 0 with its gradient; linear ones also carry
    (a, lb) meaning a'w >= lb so the solver can exploit the structure."""

    name: str
    fun: object
    grad: object
    linear: tuple[np.ndarray, float] | None = None


@dataclass(frozen=True)
class ObjectiveProblem:
    """A smooth minimization problem over fully-invested portfolios.

    The budget (sum w = 1) and leverage (||w||_1 <= 2) constraints are part
    of every problem; `constraints` lists the model-specific extras.
    """

    name: str
    d: int
    value: object
    gradient: object
    constraints: tuple[Constraint, ...] = ()
    hessian: np.ndarray | None = None
    weq: np.ndarray | None = None
    mu: np.ndarray | None = None

    def feasible(self, w: np.ndarray, tol: float = 1e-6) -> bool:
        w = np.asarray(w, dtype=np.float64)
        if abs(w.sum() - 1.0) > 1e-8:
            return False
        if np.abs(w).sum() > LEVERAGE_CAP + tol:
            return False
        return all(c.fun(w) <= tol for c in self.constraints)


def _require_lambdas(spec: ModelSpec) -> tuple[float, float]:
    arity = spec.n_hyperparams
    if arity >= 1 and spec.lambda1 is None:
        raise ModelSpecError(f"{spec.code} needs lambda1")
    if arity >= 2 and spec.lambda2 is None:
        raise ModelSpecError(f"{spec.code} needs lambda2")
    return spec.lambda1 or 0.0, spec.lambda2 or 0.0


def build(spec: ModelSpec, mu: np.ndarray, est: ShrinkageEstimate) -> ObjectiveProblem:
    """Close the model over concrete estimates, ready for the solver."""
    mu = np.asarray(mu, dtype=np.float64)
    S = est.S
    d = S.shape[0]
    if mu.shape != (d,):
        raise ModelSpecError("mean vector and covariance sizes differ")
    lam1, lam2 = _require_lambdas(spec)
    isd = est.inv_sqrt_diag

    try:
        weq = equal_corr_weights(est)
    except NumericError:
        if spec.category == "B":
            raise  # the objective itself needs w_eq
        weq = None

    def variance(w):
        return _kernels.quad_form(S, w)

    def ret_net(w):
        return float(mu @ w) - 100.0

    def sharpe_ratio(w):
        var = variance(w)
        if var < VARIANCE_FLOOR:
            return None
        return ret_net(w) / math.sqrt(var), var

    def grad_sharpe(w, var):
        root = math.sqrt(var)
        return mu / root - ret_net(w) * (S @ w) / (var * root)

    code = spec.code
    hessian = None

    if code == "A1":
        value = variance
        gradient = lambda w: 2.0 * (S @ w)
        hessian = 2.0 * S
    elif code == "A2":
        value = lambda w: lam1 * variance(w) - (1.0 - lam1) * ret_net(w)
        gradient = lambda w: lam1 * 2.0 * (S @ w) - (1.0 - lam1) * mu
        hessian = 2.0 * lam1 * S
    elif code == "A3":

        def value(w):
            parts = sharpe_ratio(w)
            return np.inf if parts is None else -parts[0]

        def gradient(w):
            parts = sharpe_ratio(w)
            if parts is None:
                return np.zeros(d)
            return -grad_sharpe(w, parts[1])

    elif code == "B1":
        value = lambda w: (1.0 - lam1) * variance(w) + lam1 * float(
            (w - weq) @ (w - weq)
        )
        gradient = lambda w: (1.0 - lam1) * 2.0 * (S @ w) + lam1 * 2.0 * (w - weq)
        hessian = 2.0 * (1.0 - lam1) * S + 2.0 * lam1 * np.eye(d)
    elif code == "B2":
        value = lambda w: (
            lam1 * variance(w)
            + lam2 * float((w - weq) @ (w - weq))
            - (1.0 - lam1 - lam2) * ret_net(w)
        )
        gradient = lambda w: (
            lam1 * 2.0 * (S @ w)
            + lam2 * 2.0 * (w - weq)
            - (1.0 - lam1 - lam2) * mu
        )
        hessian = 2.0 * lam1 * S + 2.0 * lam2 * np.eye(d)
    elif code == "B3":

        def value(w):
            parts = sharpe_ratio(w)
            if parts is None:
                return np.inf
            return lam1 * float((w - weq) @ (w - weq)) - (1.0 - lam1) * parts[0]

        def gradient(w):
            parts = sharpe_ratio(w)
            if parts is None:
                return np.zeros(d)
            return lam1 * 2.0 * (w - weq) - (1.0 - lam1) * grad_sharpe(w, parts[1])

    elif code == "C1":
        value = lambda w: _kernels.corr_mix_value(S, isd, w)
        gradient = lambda w: _kernels.corr_mix_value_grad(S, isd, w)[1]
    elif code == "C2":

        def value(w):
            return lam1 * _kernels.corr_mix_value(S, isd, w) - (1.0 - lam1) * ret_net(w)

        def gradient(w):
            return lam1 * _kernels.corr_mix_value_grad(S, isd, w)[1] - (1.0 - lam1) * mu

    elif code == "C3":

        def value(w):
            parts = sharpe_ratio(w)
            if parts is None:
                return np.inf
            return lam1 * _kernels.corr_mix_value(S, isd, w) - (1.0 - lam1) * parts[0]

        def gradient(w):
            parts = sharpe_ratio(w)
            if parts is None:
                return np.zeros(d)
            return lam1 * _kernels.corr_mix_value_grad(S, isd, w)[1] - (
                1.0 - lam1
            ) * grad_sharpe(w, parts[1])

    elif code == "D1":

        def value(w):
            return (1.0 - lam1) * variance(w) + lam1 * _kernels.corr_mix_value(S, isd, w)

        def gradient(w):
            return (1.0 - lam1) * 2.0 * (S @ w) + lam1 * _kernels.corr_mix_value_grad(
                S, isd, w
            )[1]

    elif code == "D2":

        def value(w):
            return (
                lam1 * variance(w)
                + lam2 * _kernels.corr_mix_value(S, isd, w)
                - (1.0 - lam1 - lam2) * ret_net(w)
            )

        def gradient(w):
            return (
                lam1 * 2.0 * (S @ w)
                + lam2 * _kernels.corr_mix_value_grad(S, isd, w)[1]
                - (1.0 - lam1 - lam2) * mu
            )

    else:  # pragma: no cover - catalog is closed
        raise ModelSpecError(f"unknown model code {code!r}")

    constraints = ()
    if spec.has_return_floor:
        floor = spec.r_min

        def g(w, _mu=mu, _floor=floor):
            return _floor - (float(_mu @ w) - 100.0)

        def g_grad(w, _mu=mu):
            return -_mu

        constraints = (
            Constraint(
                name="return_floor",
                fun=g,
                grad=g_grad,
                linear=(mu.copy(), floor + 100.0),
            ),
        )

    return ObjectiveProblem(
        name=spec.name,
        d=d,
        value=value,
        gradient=gradient,
        constraints=constraints,
        hessian=hessian,
        weq=weq,
        mu=mu,
    )
