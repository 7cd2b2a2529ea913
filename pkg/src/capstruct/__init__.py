"""Structural credit-equity model on a jump business clock.

Assets and debt are correlated exponential martingales, optionally run
on a subordinated clock; default is the first passage of the log
asset/debt ratio to zero observed in business time.  The package prices
survival, bonds, CDS, vanilla and knockout equity calls from one
two-dimensional Fourier transform, validates them by Monte Carlo, and
calibrates jointly to CDS and implied-vol quotes.
"""

from .barrier import (
    BarrierDecomposition,
    barrier_call,
    default_probability,
    survival_curve,
    survival_probability,
)
from .calibration import (
    CalibrationProblem,
    CalibrationResult,
    CapitalStructureCalibrator,
    calibrate,
    implied_state,
)
from .credit import YieldCurve, bond_price, cds_curve, cds_spread
from .equity import bs_call_price, call_price, implied_vol, put_price, vol_surface
from .errors import (
    CapstructError,
    ConvergenceError,
    DomainError,
    InversionQualityError,
    NumericError,
    PriceBoundsError,
    SchemaError,
    TruncationError,
)
from .fourier import (
    FourierPlan,
    PriceGrid,
    TimeChangeDensity,
    covering_grid,
    payoff_transform,
    price_vanilla_spread_grid,
    time_change_density,
)
from .market_data import QuoteSet, apply_quote_filters, load_quote_dir
from .mc import McClaims, McEstimate, mc_call, mc_claims, mc_survival, simulate_clock
from .model import (
    FirmState,
    ModelParams,
    TimeChange,
    laplace_exponent,
    phi_gbm,
    phi_increment,
    phi_lsbm,
)

__version__ = "0.1.0"

__all__ = [
    "BarrierDecomposition",
    "CalibrationProblem",
    "CalibrationResult",
    "CapitalStructureCalibrator",
    "CapstructError",
    "ConvergenceError",
    "DomainError",
    "FirmState",
    "FourierPlan",
    "InversionQualityError",
    "McClaims",
    "McEstimate",
    "ModelParams",
    "NumericError",
    "PriceBoundsError",
    "PriceGrid",
    "QuoteSet",
    "SchemaError",
    "TimeChange",
    "TimeChangeDensity",
    "TruncationError",
    "YieldCurve",
    "apply_quote_filters",
    "barrier_call",
    "bond_price",
    "bs_call_price",
    "calibrate",
    "call_price",
    "cds_curve",
    "cds_spread",
    "covering_grid",
    "default_probability",
    "implied_state",
    "implied_vol",
    "laplace_exponent",
    "load_quote_dir",
    "mc_call",
    "mc_claims",
    "mc_survival",
    "payoff_transform",
    "phi_gbm",
    "phi_increment",
    "phi_lsbm",
    "price_vanilla_spread_grid",
    "put_price",
    "simulate_clock",
    "survival_curve",
    "survival_probability",
    "time_change_density",
    "vol_surface",
]
