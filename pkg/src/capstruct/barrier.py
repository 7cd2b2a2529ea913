"""First-passage survival and knockout equity claims.

Default is the first time the log asset/debt ratio X = v - d hits zero.
Conditionally on the business clock, X is a drifted Brownian motion, so
survival given the clock has the standard reflection closed form; the
clock is then integrated out by cell-mass summation.  Knockout calls
decompose into vanilla prices at the original and mirrored initial
states through the same reflection weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .fourier import PriceGrid, covering_grid, time_change_density, TimeChangeDensity
from .model import ModelParams

__all__ = [
    "survival_given_clock",
    "survival_probability",
    "survival_curve",
    "default_probability",
    "reflected_state",
    "reflection_weight",
    "BarrierDecomposition",
    "barrier_call",
]


def survival_given_clock(params: ModelParams, g):
    """P(no default by business time g), conditionally on the clock.

    With y = X0/sigma_x and drift alpha, this is
    N((y + alpha g)/sqrt(g)) - e^{-2 alpha y} N((-y + alpha g)/sqrt(g)).
    """
    der = params.derived
    y = (params.v0 - params.d0) / der.sigma_x
    al = der.alpha
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rt = np.sqrt(g)
        direct = ndtr((y + al * g) / rt)
        image = ndtr((-y + al * g) / rt)
    surv = direct - math.exp(-2.0 * al * y) * image
    surv = np.where(g > 0.0, surv, 1.0)
    return np.clip(surv, 0.0, 1.0)


def survival_probability(
    params: ModelParams,
    T: float,
    *,
    density: TimeChangeDensity | None = None,
    n: int = 512,
) -> float:
    """P(no default by calendar time T)."""
    if T < 0.0:
        raise ValueError("maturity must be non-negative")
    if T == 0.0:
        return 1.0
    if params.tc.kind == "deterministic":
        return float(survival_given_clock(params, T))
    if density is None:
        density = time_change_density(params.tc, T, n=n)
    return min(1.0, max(0.0, density.expect(lambda g: survival_given_clock(params, g))))


def survival_curve(params: ModelParams, times, *, n: int = 512) -> np.ndarray:
    """Survival probabilities at each of ``times`` (ascending not required)."""
    times = np.asarray(times, dtype=float)
    return np.array([survival_probability(params, float(t), n=n) for t in times])


def default_probability(params: ModelParams, T: float, **kw) -> float:
    return 1.0 - survival_probability(params, T, **kw)


# ------------------------------------------------------------------- knockouts


def reflected_state(params: ModelParams) -> tuple[float, float]:
    """Initial state mirrored across the default boundary (negated X0)."""
    mirrored = params.derived.reflect @ np.array([params.v0, params.d0])
    return float(mirrored[0]), float(mirrored[1])


def reflection_weight(params: ModelParams) -> float:
    """Image weight e^{-2 alpha X0 / sigma_x} of the mirrored state."""
    der = params.derived
    return math.exp(-2.0 * der.alpha * (params.v0 - params.d0) / der.sigma_x)


@dataclass(frozen=True)
class BarrierDecomposition:
    """Vanilla = knocked-in + knocked-out, split by the reflection identity."""

    strike: float
    maturity: float
    vanilla: float
    down_in: float
    down_out: float
    image_weight: float

    @property
    def decomposition_gap(self) -> float:
        """Residual vanilla - (in + out); non-zero only through clamping."""
        return self.vanilla - (self.down_in + self.down_out)


def barrier_call(
    params: ModelParams,
    T: float,
    strike: float,
    discount: float = 1.0,
    *,
    grid: PriceGrid | None = None,
) -> BarrierDecomposition:
    """Price the equity call knocked out at the default boundary.

    down_out = F(Y0) - w F(mirror(Y0)) with F the vanilla spread price
    and w the reflection weight; down_in is the complement, so the
    decomposition reproduces the vanilla exactly.  A prebuilt ``grid``
    (covering both states) avoids repeating the transform per strike.
    """
    if grid is None:
        grid = covering_grid(params, T, [strike], discount, mirror=True)
    vanilla = float(grid.strike_price(params.v0, params.d0, strike))
    mv, md = reflected_state(params)
    down_in = reflection_weight(params) * float(grid.strike_price(mv, md, strike))
    down_in = min(down_in, vanilla)
    return BarrierDecomposition(
        strike=strike,
        maturity=T,
        vanilla=vanilla,
        down_in=down_in,
        down_out=vanilla - down_in,
        image_weight=reflection_weight(params),
    )
