"""Discounting and credit-linked claims.

The zero curve interpolates continuously-compounded yields linearly in
maturity with flat extrapolation.  Defaultable bonds pay full notional
on survival and a recovery fraction of notional at maturity otherwise;
CDS spreads balance the quarterly premium leg against a protection leg
discretized at the payment dates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .barrier import survival_curve, survival_probability
from .errors import SchemaError
from .model import ModelParams

__all__ = ["YieldCurve", "bond_price", "cds_spread", "cds_curve", "payment_dates"]


@dataclass(frozen=True)
class YieldCurve:
    """Zero-coupon curve, linear in the continuously-compounded yield."""

    tenors: tuple
    zeros: tuple

    def __post_init__(self) -> None:
        t = np.asarray(self.tenors, dtype=float)
        z = np.asarray(self.zeros, dtype=float)
        if t.size == 0 or t.size != z.size:
            raise ValueError("curve needs matching, non-empty tenor and yield lists")
        if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
            raise ValueError("curve tenors must be positive and strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(z))):
            raise ValueError("curve entries must be finite")

    @classmethod
    def flat(cls, rate: float) -> "YieldCurve":
        return cls((1.0,), (float(rate),))

    def zero_yield(self, t):
        return np.interp(np.asarray(t, dtype=float), self.tenors, self.zeros)

    def discount(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-self.zero_yield(t) * t)

    @classmethod
    def from_par_quotes(cls, tenors, rates) -> "YieldCurve":
        """Bootstrap from market quotes.

        Quotes up to one year are deposit-style and map directly to
        continuously-compounded zeros.  Longer quotes are par yields of
        semiannual coupon bonds; their zeros are solved sequentially,
        with coupon dates discounted off the curve built so far plus
        linear interpolation up to the quote being solved.
        """
        tenors = [float(t) for t in tenors]
        rates = [float(r) for r in rates]
        if sorted(tenors) != tenors or len(set(tenors)) != len(tenors):
            raise SchemaError("curve quotes must have strictly increasing tenors")
        known_t: list[float] = []
        known_z: list[float] = []
        for tenor, rate in zip(tenors, rates):
            if tenor <= 1.0 + 1e-9:
                known_t.append(tenor)
                known_z.append(math.log1p(rate * tenor) / tenor)
                continue
            coupons = np.arange(0.5, tenor + 1e-9, 0.5)

            def par_error(z: float) -> float:
                trial = YieldCurve(tuple(known_t + [tenor]), tuple(known_z + [z]))
                dfs = trial.discount(coupons)
                return float(0.5 * rate * dfs.sum() + dfs[-1] - 1.0)

            known_z.append(brentq(par_error, -0.5, 1.5, xtol=1e-14))
            known_t.append(tenor)
        return cls(tuple(known_t), tuple(known_z))


def bond_price(
    params: ModelParams,
    T: float,
    curve: YieldCurve,
    *,
    n: int = 512,
    survival: float | None = None,
) -> float:
    """Defaultable zero-coupon bond, unit notional, recovery paid at T."""
    p = survival_probability(params, T, n=n) if survival is None else survival
    return float(curve.discount(T)) * (p + params.recovery * (1.0 - p))


def payment_dates(tenor: float, interval: float = 0.25) -> np.ndarray:
    count = round(tenor / interval)
    if count < 1 or abs(count * interval - tenor) > 1e-9:
        raise ValueError(f"tenor {tenor} is not a multiple of the payment interval")
    return interval * np.arange(1, count + 1)


def _spread_from_legs(
    survival: np.ndarray, dfs: np.ndarray, recovery: float, interval: float
) -> float:
    # protection leg discretized by integration by parts over payment dates
    defaults = 1.0 - survival
    protection = float(np.dot(defaults[:-1], dfs[:-1] - dfs[1:]) + dfs[-1] * defaults[-1])
    premium = interval * float(np.dot(survival, dfs))
    return (1.0 - recovery) * protection / premium


def cds_spread(
    params: ModelParams,
    tenor: float,
    curve: YieldCurve,
    *,
    interval: float = 0.25,
    n: int = 512,
) -> float:
    """Par CDS spread (decimal per year) for quarterly premium payments."""
    dates = payment_dates(tenor, interval)
    surv = survival_curve(params, dates, n=n)
    dfs = np.asarray(curve.discount(dates), dtype=float)
    return _spread_from_legs(surv, dfs, params.recovery, interval)


def cds_curve(
    params: ModelParams,
    tenors,
    curve: YieldCurve,
    *,
    interval: float = 0.25,
    n: int = 512,
) -> np.ndarray:
    """Par spreads for several tenors, sharing one survival-curve sweep."""
    tenors = [float(t) for t in tenors]
    all_dates = payment_dates(max(tenors), interval)
    surv = survival_curve(params, all_dates, n=n)
    dfs = np.asarray(curve.discount(all_dates), dtype=float)
    out = []
    for tenor in tenors:
        k = round(tenor / interval)
        if abs(k * interval - tenor) > 1e-9:
            raise ValueError(f"tenor {tenor} is not a multiple of the payment interval")
        out.append(_spread_from_legs(surv[:k], dfs[:k], params.recovery, interval))
    return np.array(out)
