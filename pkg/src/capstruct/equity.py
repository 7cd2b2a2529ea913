"""Equity calls on the firm's net value and their implied volatilities.

Stock is the positive part of assets minus debt, so an equity call is a
spread option on the two firm exponentials.  Implied volatilities quote
those prices through the Black-Scholes formula on the stock itself.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from ._parallel import parallel_map
from .credit import YieldCurve
from .errors import PriceBoundsError
from .fourier import PriceGrid, covering_grid
from .model import ModelParams

__all__ = ["bs_call_price", "implied_vol", "call_price", "put_price", "vol_surface"]


def bs_call_price(spot: float, strike, T: float, vol, discount: float = 1.0):
    """Black-Scholes call with discounting folded into the strike."""
    strike = np.asarray(strike, dtype=float)
    vol = np.asarray(vol, dtype=float)
    keff = strike * discount
    with np.errstate(divide="ignore", invalid="ignore"):
        total = vol * math.sqrt(T)
        d1 = np.log(spot / keff) / total + 0.5 * total
        d2 = d1 - total
        price = spot * ndtr(d1) - keff * ndtr(d2)
    return np.where(total > 0.0, price, np.maximum(spot - keff, 0.0))


def implied_vol(
    price: float,
    spot: float,
    strike: float,
    T: float,
    discount: float = 1.0,
    *,
    vol_cap: float = 20.0,
) -> float:
    """Invert Black-Scholes for the volatility reproducing ``price``.

    Prices at or outside the static no-arbitrage interval
    (max(spot - strike*discount, 0), spot) have no finite implied
    volatility and raise PriceBoundsError.
    """
    if T <= 0.0:
        raise ValueError("implied volatility needs a positive maturity")
    intrinsic = max(spot - strike * discount, 0.0)
    if not intrinsic < price < spot:
        raise PriceBoundsError(
            f"price {price:.6g} outside the invertible interval "
            f"({intrinsic:.6g}, {spot:.6g})"
        )

    def gap(vol: float) -> float:
        return float(bs_call_price(spot, strike, T, vol, discount)) - price

    lo, hi = 1e-9, 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > vol_cap:
            raise PriceBoundsError("implied volatility above the search cap")
    return float(brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12))


def call_price(
    params: ModelParams,
    T: float,
    strikes,
    curve: YieldCurve,
    *,
    grid: PriceGrid | None = None,
):
    """Vanilla equity call prices for one maturity and several strikes."""
    discount = float(curve.discount(T))
    if grid is None:
        grid = covering_grid(params, T, strikes, discount, mirror=False)
    return grid.strike_price(params.v0, params.d0, strikes)


def put_price(params: ModelParams, T: float, strikes, curve: YieldCurve, **kw):
    """European puts through put-call parity on the stock forward."""
    strikes = np.asarray(strikes, dtype=float)
    discount = float(curve.discount(T))
    calls = call_price(params, T, strikes, curve, **kw)
    return calls - params.state.stock + strikes * discount


def vol_surface(
    params: ModelParams,
    maturities,
    moneyness,
    curve: YieldCurve,
) -> np.ndarray:
    """Model implied-vol surface on a maturity x moneyness grid.

    Moneyness is strike over spot.  One transform grid per maturity
    serves all strikes.  Shape (len(maturities), len(moneyness)).
    """
    maturities = np.asarray(maturities, dtype=float)
    moneyness = np.asarray(moneyness, dtype=float)
    spot = params.state.stock
    strikes = moneyness * spot

    def one_maturity(T: float) -> np.ndarray:
        discount = float(curve.discount(T))
        grid = covering_grid(params, T, strikes, discount, mirror=False)
        prices = np.atleast_1d(grid.strike_price(params.v0, params.d0, strikes))
        return np.array(
            [implied_vol(float(p), spot, float(k), T, discount)
             for k, p in zip(strikes, prices)]
        )

    rows = parallel_map(one_maturity, [float(T) for T in maturities])
    return np.vstack(rows) if rows else np.empty((0, moneyness.size))
