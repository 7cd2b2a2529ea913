"""Model core: two correlated firm-value factors on a common business clock.

The firm's asset and debt values are exponentials of drifting Brownian
motions, both run on the same increasing clock ``G_t`` (a Levy
subordinator with unit mean rate).  Working with discounted log-values
``v_t`` (assets) and ``d_t`` (debt), the model is fixed by the two
volatilities, their correlation, the clock, and the initial state.

Equity is the spread ``S_t = max(V_t - D_t, 0)`` and default is the first
time the clock carries the log-leverage ``X_t = v_t - d_t`` to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = [
    "TimeChange",
    "ModelParams",
    "DerivedCoefficients",
    "FirmState",
    "laplace_exponent",
    "phi_gbm",
    "phi_lsbm",
    "phi_increment",
]

KINDS = ("deterministic", "vg", "exp")


# ---------------------------------------------------------------- time change


@dataclass(frozen=True)
class TimeChange:
    """Business clock: deterministic, gamma-jump ("vg") or
    compound-Poisson-exponential-jump ("exp") subordinator.

    ``b`` is the drift (continuous share of business time) and ``c`` the
    jump intensity scale.  The mean jump size ``a = (1 - b)/c`` makes
    ``E[G_t] = t`` in all cases.
    """

    kind: str = "deterministic"
    b: float = 1.0
    c: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown time-change kind {self.kind!r}")
        if self.kind != "deterministic":
            if not (0.0 < self.b < 1.0):
                raise ValueError(f"drift b must lie in (0, 1), got {self.b}")
            if not self.c > 0.0:
                raise ValueError(f"jump intensity c must be positive, got {self.c}")

    @classmethod
    def deterministic(cls) -> "TimeChange":
        return cls("deterministic", 1.0, 0.0)

    @classmethod
    def vg(cls, b: float, c: float) -> "TimeChange":
        return cls("vg", b, c)

    @classmethod
    def exp_jumps(cls, b: float, c: float) -> "TimeChange":
        return cls("exp", b, c)

    @property
    def mean_jump(self) -> float:
        """Mean jump size a = (1 - b)/c."""
        if self.kind == "deterministic":
            return 0.0
        return (1.0 - self.b) / self.c

    def atom_weight(self, t: float) -> float:
        """P[G_t == b t], the point mass at the clock's drift floor."""
        if self.kind == "deterministic":
            return 1.0
        if self.kind == "exp":
            return math.exp(-self.c * t)
        return 0.0


def _log1p_c(w: np.ndarray) -> np.ndarray:
    """Complex log(1 + w) accurate for small |w|."""
    w = np.asarray(w, dtype=np.complex128)
    small = np.abs(w) < 1e-4
    out = np.log(np.where(small, 1.0, 1.0 + w))
    ws = np.where(small, w, 0.0)
    series = ws * (1.0 - ws * (0.5 - ws * (1.0 / 3.0 - 0.25 * ws)))
    return np.where(small, series, out)


def laplace_exponent(tc: TimeChange, u, t: float):
    """psi(u, t) = -log E[exp(-u G_t)], vectorized over complex ``u``.

    Normalized so that d psi/du at 0 equals ``t`` (unit mean rate).
    Raises DomainError when Re(1 + a u) <= 0, where the gamma branch cut
    (vg) or the transform pole (exp) sits.
    """
    u = np.asarray(u, dtype=np.complex128)
    if tc.kind == "deterministic":
        return t * u
    a = tc.mean_jump
    w = a * u
    if np.any(1.0 + w.real <= 0.0):
        raise DomainError("laplace_exponent argument beyond Re(1 + a*u) > 0")
    if tc.kind == "vg":
        return t * (tc.b * u + tc.c * _log1p_c(w))
    return t * (tc.b * u + tc.c * w / (1.0 + w))


# ------------------------------------------------------------------- firm state


@dataclass(frozen=True)
class FirmState:
    """Initial discounted log-values of assets and debt."""

    v0: float
    d0: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.v0) and np.isfinite(self.d0)):
            raise ValueError("log-values must be finite")
        if not self.v0 > self.d0:
            raise ValueError("initial state must be solvent (v0 > d0)")

    @property
    def asset(self) -> float:
        return math.exp(self.v0)

    @property
    def debt(self) -> float:
        return math.exp(self.d0)

    @property
    def stock(self) -> float:
        return self.asset - self.debt

    @property
    def log_leverage(self) -> float:
        """X0 = v0 - d0 > 0; default is the first passage of X to 0."""
        return self.v0 - self.d0


# ------------------------------------------------------------ derived quantities


@dataclass(frozen=True, eq=False)
class DerivedCoefficients:
    """Coefficients of the decoupled representation.

    ``X_t = X0 + sigma_x (B_t + alpha t)`` carries default risk, and the
    orthogonal factor completes (v, d):
    ``v = v0 + sigma_v [rho_vx (B + alpha t) + rho_vx_orth (B_perp + alpha_perp t)]``
    and likewise for d.  ``reflect`` maps an initial state to its mirror
    across the default boundary and squares to the identity.
    """

    sigma_x: float
    alpha: float
    alpha_perp: float
    rho_vx: float
    rho_dx: float
    rho_vx_orth: float
    rho_dx_orth: float
    m: float
    decouple: np.ndarray | None
    reflect: np.ndarray


def _derived(p: "ModelParams") -> DerivedCoefficients:
    sv, sd, rho = p.sigma_v, p.sigma_d, p.rho
    sx2 = sv * sv - 2.0 * rho * sv * sd + sd * sd
    sx = math.sqrt(sx2)
    alpha = (sd * sd - sv * sv) / (2.0 * sx)
    root = math.sqrt(1.0 - rho * rho)
    rho_vx = (sv - rho * sd) / sx
    rho_dx = (rho * sv - sd) / sx
    rho_vx_orth = root * sd / sx
    rho_dx_orth = root * sv / sx
    # alpha_perp solves the martingale drift conditions
    #   sigma_v (rho_vx alpha + rho_vx_orth alpha_perp) = -sigma_v^2 / 2
    #   sigma_d (rho_dx alpha + rho_dx_orth alpha_perp) = -sigma_d^2 / 2
    alpha_perp = (rho * (sv * sv + sd * sd) - 2.0 * sv * sd) / (2.0 * sx * root)

    den = rho * sv * sd - sd * sd
    if sd == 0.0:
        # one-factor limit: the mirror state keeps d0 and reflects v0 across it
        m = math.inf
        decouple = None
        reflect = np.array([[-1.0, 2.0], [0.0, 1.0]])
    else:
        if abs(den) <= 1e-12 * max(sv * sv, sd * sd):
            raise DomainError(
                "no independent decoupling: rho*sigma_v*sigma_d == sigma_d^2"
            )
        m = (rho * sv * sd - sv * sv) / den
        decouple = np.array([[1.0, -1.0], [1.0, m]])
        reflect = np.array([[1.0 - m, 2.0 * m], [2.0, m - 1.0]]) / (1.0 + m)
    return DerivedCoefficients(
        sigma_x=sx,
        alpha=alpha,
        alpha_perp=alpha_perp,
        rho_vx=rho_vx,
        rho_dx=rho_dx,
        rho_vx_orth=rho_vx_orth,
        rho_dx_orth=rho_dx_orth,
        m=m,
        decouple=decouple,
        reflect=reflect,
    )


# ---------------------------------------------------------------- model params


@dataclass(frozen=True)
class ModelParams:
    """Volatilities, correlation, business clock and initial state."""

    sigma_v: float
    sigma_d: float
    rho: float
    v0: float
    d0: float
    tc: TimeChange = TimeChange.deterministic()
    recovery: float = 0.0

    def __post_init__(self) -> None:
        if not self.sigma_v > 0.0:
            raise ValueError(f"sigma_v must be positive, got {self.sigma_v}")
        if self.sigma_d < 0.0:
            raise ValueError(f"sigma_d must be non-negative, got {self.sigma_d}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if not 0.0 <= self.recovery < 1.0:
            raise ValueError(f"recovery must lie in [0, 1), got {self.recovery}")
        FirmState(self.v0, self.d0)  # validates solvency and finiteness

    @property
    def state(self) -> FirmState:
        return FirmState(self.v0, self.d0)

    @cached_property
    def derived(self) -> DerivedCoefficients:
        return _derived(self)

    @property
    def covariance(self) -> np.ndarray:
        sv, sd = self.sigma_v, self.sigma_d
        off = self.rho * sv * sd
        return np.array([[sv * sv, off], [off, sd * sd]])

    def with_state(self, v0: float, d0: float) -> "ModelParams":
        return ModelParams(self.sigma_v, self.sigma_d, self.rho, v0, d0,
                           self.tc, self.recovery)


# -------------------------------------------------------- characteristic functions


def _quad_forms(p: ModelParams, u1, u2):
    sv2 = p.sigma_v * p.sigma_v
    sd2 = p.sigma_d * p.sigma_d
    off = p.rho * p.sigma_v * p.sigma_d
    quad = sv2 * u1 * u1 + 2.0 * off * u1 * u2 + sd2 * u2 * u2
    lin = sv2 * u1 + sd2 * u2
    return quad, lin


def phi_increment(p: ModelParams, u, T: float):
    """Characteristic function of the increments (v_T - v0, d_T - d0).

    Both factors are martingale exponentials per unit business time, so
    the exponent is psi(u Sigma u'/2 + i u (sigma_v^2, sigma_d^2)'/2, T)
    with psi the clock's Laplace exponent.
    """
    u1 = np.asarray(u[0], dtype=np.complex128)
    u2 = np.asarray(u[1], dtype=np.complex128)
    quad, lin = _quad_forms(p, u1, u2)
    xi = 0.5 * quad + 0.5j * lin
    with np.errstate(over="raise"):
        try:
            val = np.exp(-laplace_exponent(p.tc, xi, T))
        except FloatingPointError:
            raise DomainError("characteristic function overflowed") from None
    if not np.all(np.isfinite(val)):
        raise DomainError("characteristic function overflowed")
    return val


def phi_gbm(p: ModelParams, u, T: float):
    """Joint CF of (v_T, d_T) on the deterministic clock.

    exp(i u Y0' - (T/2) u Sigma u' - i (T/2) u (sigma_v^2, sigma_d^2)').
    Factorizes as exp(i u Y0') times a Y0-independent term.
    """
    u1 = np.asarray(u[0], dtype=np.complex128)
    u2 = np.asarray(u[1], dtype=np.complex128)
    quad, lin = _quad_forms(p, u1, u2)
    with np.errstate(over="raise"):
        try:
            val = np.exp(1j * (u1 * p.v0 + u2 * p.d0) - 0.5 * T * quad - 0.5j * T * lin)
        except FloatingPointError:
            raise DomainError("characteristic function overflowed") from None
    if not np.all(np.isfinite(val)):
        raise DomainError("characteristic function overflowed")
    return val


def phi_lsbm(p: ModelParams, u, T: float):
    """Joint CF of (v_T, d_T) on the subordinated clock.

    Reduces exactly to phi_gbm for the deterministic clock and inherits
    the clock's domain restriction through the Laplace exponent.
    """
    u1 = np.asarray(u[0], dtype=np.complex128)
    u2 = np.asarray(u[1], dtype=np.complex128)
    return np.exp(1j * (u1 * p.v0 + u2 * p.d0)) * phi_increment(p, (u1, u2), T)
