"""Joint calibration to CDS spreads and equity implied volatilities.

The free parameters are the two volatilities, their correlation, the
clock parameters (stochastic kinds), the recovery rate and the initial
log asset/debt ratio.  The initial state itself is pinned by the
observed stock price, so quotes are matched in relative terms:

    J = sum_i ((cds_model_i - cds_mkt_i) / cds_mkt_i)^2
      + (1/C) sum_j ((iv_model_j - iv_mkt_j) / iv_mkt_j)^2

with C a fixed balance constant between the two quote groups.  The
reported fit quality is the unweighted relative root mean square over
all quotes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator

from .credit import YieldCurve, cds_curve
from .equity import vol_surface
from .errors import CapstructError, ConvergenceError
from .market_data import DAYS_PER_YEAR, QuoteSet
from .model import ModelParams, TimeChange

__all__ = [
    "implied_state",
    "CalibrationProblem",
    "CalibrationResult",
    "calibrate",
    "CapitalStructureCalibrator",
]

_KINDS = ("gbm", "vg", "exp")
_FIELDS_LSBM = ("rho", "sigma_v", "sigma_d", "b", "c", "recovery", "log_leverage")
_FIELDS_GBM = ("rho", "sigma_v", "sigma_d", "recovery", "log_leverage")
_BOUNDS = {
    "rho": (-0.99, 0.99),
    "sigma_v": (0.01, 2.0),
    "sigma_d": (0.0, 2.0),
    "b": (0.01, 0.99),
    "c": (1e-4, 1e3),
    "recovery": (0.0, 0.99),
    "log_leverage": (1e-4, 5.0),
}
_START = {
    "rho": -0.1,
    "sigma_v": 0.25,
    "sigma_d": 0.15,
    "b": 0.5,
    "c": 0.05,
    "recovery": 0.05,
    "log_leverage": 0.7,
}
_PENALTY = 1e4


def implied_state(stock_price: float, log_leverage: float) -> tuple[float, float]:
    """Initial (v0, d0) from the stock price and the log asset/debt ratio.

    Solves e^{v0} - e^{d0} = stock with v0 - d0 = log_leverage.
    """
    if not stock_price > 0.0:
        raise ValueError("stock price must be positive")
    if not log_leverage > 0.0:
        raise ValueError("log asset/debt ratio must be positive")
    d0 = math.log(stock_price / math.expm1(log_leverage))
    return d0 + log_leverage, d0


def fields_for(kind: str) -> tuple:
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return _FIELDS_GBM if kind == "gbm" else _FIELDS_LSBM


def _time_change(kind: str, values: dict) -> TimeChange:
    if kind == "gbm":
        return TimeChange.deterministic()
    if kind == "vg":
        return TimeChange.vg(values["b"], values["c"])
    return TimeChange.exp_jumps(values["b"], values["c"])


@dataclass(frozen=True)
class CalibrationProblem:
    """Quotes and curve for one calibration date."""

    stock_price: float
    curve: YieldCurve
    cds_tenors: np.ndarray
    cds_spreads: np.ndarray
    vol_maturities: np.ndarray
    vol_moneyness: np.ndarray
    vol_quotes: np.ndarray
    equity_balance: float = 7.0

    def __post_init__(self) -> None:
        cds_t = np.asarray(self.cds_tenors, dtype=float)
        cds_s = np.asarray(self.cds_spreads, dtype=float)
        mats = np.asarray(self.vol_maturities, dtype=float)
        mon = np.asarray(self.vol_moneyness, dtype=float)
        quotes = np.asarray(self.vol_quotes, dtype=float)
        object.__setattr__(self, "cds_tenors", cds_t)
        object.__setattr__(self, "cds_spreads", cds_s)
        object.__setattr__(self, "vol_maturities", mats)
        object.__setattr__(self, "vol_moneyness", mon)
        object.__setattr__(self, "vol_quotes", quotes)
        if cds_t.shape != cds_s.shape or cds_t.ndim != 1:
            raise ValueError("CDS tenor and spread arrays must be 1-d and matching")
        if np.any(cds_s <= 0.0):
            raise ValueError("CDS spreads must be positive")
        if quotes.shape != (mats.size, mon.size):
            raise ValueError("vol quote matrix must be maturities x moneyness")
        if not self.stock_price > 0.0:
            raise ValueError("stock price must be positive")
        if not self.equity_balance > 0.0:
            raise ValueError("equity balance constant must be positive")
        if self.quote_count == 0:
            raise ValueError("no quotes to calibrate against")

    @property
    def quote_count(self) -> int:
        return int(self.cds_tenors.size + np.isfinite(self.vol_quotes).sum())

    @classmethod
    def from_quotes(cls, quotes: QuoteSet, *, equity_balance: float = 7.0):
        """Pivot a (pre-filtered) quote set into calibration arrays."""
        curve = YieldCurve.from_par_quotes(
            [q.tenor for q in quotes.yields], [q.yield_decimal for q in quotes.yields]
        )
        mats = sorted({q.maturity_days for q in quotes.vols})
        mons = sorted({q.moneyness for q in quotes.vols})
        matrix = np.full((len(mats), len(mons)), np.nan)
        for q in quotes.vols:
            matrix[mats.index(q.maturity_days), mons.index(q.moneyness)] = q.implied_vol
        return cls(
            stock_price=quotes.stock_price,
            curve=curve,
            cds_tenors=np.array([q.tenor_years for q in quotes.cds]),
            cds_spreads=np.array([q.spread for q in quotes.cds]),
            vol_maturities=np.array(mats) / DAYS_PER_YEAR,
            vol_moneyness=np.array(mons),
            vol_quotes=matrix,
            equity_balance=equity_balance,
        )

    def params_from_theta(self, kind: str, theta) -> ModelParams:
        values = dict(zip(fields_for(kind), np.asarray(theta, dtype=float)))
        v0, d0 = implied_state(self.stock_price, values["log_leverage"])
        return ModelParams(
            sigma_v=values["sigma_v"],
            sigma_d=values["sigma_d"],
            rho=values["rho"],
            v0=v0,
            d0=d0,
            tc=_time_change(kind, values),
            recovery=values["recovery"],
        )

    def relative_residuals(self, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
        model_cds = cds_curve(params, self.cds_tenors, self.curve)
        cds_res = (model_cds - self.cds_spreads) / self.cds_spreads
        ivs = vol_surface(params, self.vol_maturities, self.vol_moneyness, self.curve)
        mask = np.isfinite(self.vol_quotes)
        iv_res = (ivs[mask] - self.vol_quotes[mask]) / self.vol_quotes[mask]
        return cds_res, iv_res

    def objective(self, params: ModelParams) -> float:
        cds_res, iv_res = self.relative_residuals(params)
        return float(np.dot(cds_res, cds_res)
                     + np.dot(iv_res, iv_res) / self.equity_balance)

    def rmse(self, params: ModelParams) -> float:
        """Unweighted relative RMS error over all quotes."""
        cds_res, iv_res = self.relative_residuals(params)
        total = float(np.dot(cds_res, cds_res) + np.dot(iv_res, iv_res))
        return math.sqrt(total / self.quote_count)


@dataclass(frozen=True)
class CalibrationResult:
    kind: str
    params: ModelParams
    theta: dict
    objective: float
    rmse: float
    trace: tuple
    n_evaluations: int
    message: str

    def to_json_dict(self) -> dict:
        out = {
            "model": self.kind,
            "sigma_v": self.params.sigma_v,
            "sigma_d": self.params.sigma_d,
            "rho": self.params.rho,
            "recovery": self.params.recovery,
            "v0": self.params.v0,
            "d0": self.params.d0,
            "rmse": self.rmse,
        }
        if self.kind != "gbm":
            out["b"] = self.params.tc.b
            out["c"] = self.params.tc.c
        return out


def _start_vectors(kind: str, starts: int, seed: int) -> list:
    fields = fields_for(kind)
    rng = np.random.default_rng(seed)
    vecs = [np.array([_START[f] for f in fields])]
    draw = {
        "rho": lambda: rng.uniform(-0.6, 0.4),
        "sigma_v": lambda: rng.uniform(0.05, 0.5),
        "sigma_d": lambda: rng.uniform(0.01, 0.3),
        "b": lambda: rng.uniform(0.3, 0.9),
        "c": lambda: math.exp(rng.uniform(math.log(0.01), math.log(0.5))),
        "recovery": lambda: rng.uniform(0.0, 0.5),
        "log_leverage": lambda: math.exp(rng.uniform(math.log(0.2), math.log(2.0))),
    }
    for _ in range(max(0, starts - 1)):
        vecs.append(np.array([draw[f]() for f in fields]))
    return vecs


def calibrate(
    problem: CalibrationProblem,
    kind: str = "vg",
    *,
    starts: int = 5,
    seed: int = 0,
    maxiter: int = 150,
) -> CalibrationResult:
    """Fit ``kind`` to the problem by multi-start trust-region least squares.

    The residual vector stacks the relative CDS errors and the balance-
    weighted relative vol errors, so the squared norm is the objective
    J.  Jacobians are forward differences; ``maxiter`` caps the
    trust-region iterations of each start.  Pricing failures (contour
    out of domain, uninvertible vols and the like) become a penalty
    residual growing with distance from the search center, so the
    optimizer backs away on its own.
    """
    fields = fields_for(kind)
    lower = np.array([_BOUNDS[f][0] for f in fields])
    upper = np.array([_BOUNDS[f][1] for f in fields])
    center = np.array([_START[f] for f in fields])
    weight = 1.0 / math.sqrt(problem.equity_balance)
    m = problem.quote_count
    cache: dict = {}
    trace: list = []

    def residuals(theta: np.ndarray) -> np.ndarray:
        key = theta.tobytes()
        if key not in cache:
            try:
                params = problem.params_from_theta(kind, theta)
                cds_res, iv_res = problem.relative_residuals(params)
                vec = np.concatenate([cds_res, weight * iv_res])
            except (CapstructError, ValueError, ArithmeticError):
                scale = _PENALTY * (1.0 + float(np.linalg.norm(theta - center)))
                vec = np.full(m, math.sqrt(scale / m))
            cache[key] = vec
            val = float(np.dot(vec, vec))
            trace.append(min(val, trace[-1]) if trace else val)
        return cache[key]

    options = dict(
        jac="2-point",
        bounds=(lower, upper),
        method="trf",
        x_scale="jac",
        diff_step=1e-6,
    )
    best = None
    for x0 in _start_vectors(kind, starts, seed):
        res = least_squares(
            residuals, x0, ftol=1e-12, xtol=1e-12, gtol=None,
            max_nfev=maxiter, **options,
        )
        if best is None or res.cost < best.cost:
            best = res
    if best is not None and np.isfinite(best.cost):
        # the exploration tolerances stop in a shrinking trust region well
        # before the quadratic phase bottoms out; polish the winning basin
        res = least_squares(
            residuals, best.x.copy(), ftol=5e-16, xtol=None, gtol=None,
            max_nfev=min(maxiter, 40), **options,
        )
        if res.cost < best.cost:
            best = res
    objective = 2.0 * float(best.cost) if best is not None else math.inf
    if best is None or not np.isfinite(objective) or objective >= _PENALTY:
        raise ConvergenceError("no calibration start reached a feasible fit")
    params = problem.params_from_theta(kind, best.x)
    return CalibrationResult(
        kind=kind,
        params=params,
        theta=dict(zip(fields, (float(v) for v in best.x))),
        objective=objective,
        rmse=problem.rmse(params),
        trace=tuple(trace),
        n_evaluations=len(trace),
        message=str(best.message),
    )


class CapitalStructureCalibrator(BaseEstimator):
    """Estimator-style front end: ``fit`` runs ``calibrate``.

    Hyper-parameters follow the usual get_params/set_params protocol;
    fitted state lands in ``result_``, ``params_`` and ``rmse_``.
    """

    def __init__(self, kind: str = "vg", starts: int = 5, seed: int = 0,
                 maxiter: int = 150):
        self.kind = kind
        self.starts = starts
        self.seed = seed
        self.maxiter = maxiter

    def fit(self, X: CalibrationProblem, y=None) -> "CapitalStructureCalibrator":
        if not isinstance(X, CalibrationProblem):
            raise TypeError("fit expects a CalibrationProblem")
        self.result_ = calibrate(
            X, self.kind, starts=self.starts, seed=self.seed, maxiter=self.maxiter
        )
        self.params_ = self.result_.params
        self.rmse_ = self.result_.rmse
        return self

    def score(self, X: CalibrationProblem, y=None) -> float:
        """Negative relative RMS error of the fitted parameters on ``X``."""
        return -X.rmse(self.params_)
