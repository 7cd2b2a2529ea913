"""Fourier pricing engine.

Vanilla spread prices come from a two-dimensional inverse Fourier
integral of (characteristic function) x (payoff transform) along a
shifted contour, evaluated for a whole lattice of initial log-states
with one FFT.  Strike handling rides on the payoff's homogeneity, so a
single grid serves every strike and the mirrored initial state used by
the barrier decomposition.

The distribution of the business clock G_T is exposed separately as a
cell-mass object used for one-dimensional survival integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.special import gammainc, gammaincc, gammaincinv, i1e

from .errors import DomainError, InversionQualityError, TruncationError
from .gammafn import loggamma
from .model import ModelParams, TimeChange, laplace_exponent, phi_increment

__all__ = [
    "payoff_transform",
    "FourierPlan",
    "PriceGrid",
    "price_vanilla_spread_grid",
    "covering_grid",
    "TimeChangeDensity",
    "time_change_density",
]

# Candidate damping pairs; the plan builder picks the admissible one with
# the cheapest state window.
_EPS1_CANDIDATES = (-3.0, -2.4, -2.0, -1.6, -1.35, -1.15)
_EPS2_CANDIDATES = (1.0, 0.5, 0.25, 0.12)
_CONTOUR_MARGIN = 0.05
_MIN_TAIL_RATE = 0.05
_BOUNDARY_DECAY = 1e-8   # frequency-side truncation check
_EDGE_DECAY = 2e-3       # full-frame aliasing check (error ~ square of this)
_WRAP_TOL = 1e-4         # admissible wrap-around leakage into read-off states
_CORNER_MARGIN = 12.5    # decay demanded of the double-wrapped diagonal image
_CORNER_GATE = -3.0      # spread log-gap below which that image is worthless
_WIDEN_LADDER = (1.0, 1.7, 2.89)
_BOX_PAD = 0.35


# ------------------------------------------------------------ payoff transform


def payoff_transform(u1, u2):
    """Fourier transform of the spread payoff (e^{x1} - e^{x2} - 1)^+.

    P(u1, u2) = Gamma(i(u1+u2) - 1) Gamma(-i u2) / Gamma(i u1 + 1),
    defined on contours with Im u2 > 0 and Im(u1 + u2) < -1.  On any
    admissible contour all three Gamma arguments stay in the right
    half-plane, away from the poles.
    """
    u1 = np.asarray(u1, dtype=np.complex128)
    u2 = np.asarray(u2, dtype=np.complex128)
    if not np.all(u2.imag > 0.0):
        raise DomainError("payoff transform needs Im u2 > 0")
    if not np.all(u1.imag + u2.imag < -1.0):
        raise DomainError("payoff transform needs Im(u1 + u2) < -1")
    expo = (
        loggamma(1j * (u1 + u2) - 1.0)
        + loggamma(-1j * u2)
        - loggamma(1j * u1 + 1.0)
    )
    with np.errstate(under="ignore"):
        return np.exp(expo)


@lru_cache(maxsize=6)
def _transform_mesh(n1, n2, du1, du2, eps1, eps2):
    # payoff transform sampled on the contour mesh; parameter independent,
    # so it is cached per plan geometry and reused across maturities
    w1 = (np.arange(n1) - n1 // 2) * du1
    w2 = (np.arange(n2) - n2 // 2) * du2
    u1 = (w1 + 1j * eps1)[:, None]
    u2 = (w2 + 1j * eps2)[None, :]
    return payoff_transform(u1, u2)


# -------------------------------------------------------------------- the plan


def _xi_floor(params: ModelParams, eps1: float, eps2: float) -> float:
    # minimum over the contour of Re xi(u); attained at w = 0
    cov = params.covariance
    e = np.array([eps1, eps2])
    lin = np.array([params.sigma_v**2, params.sigma_d**2])
    return float(-0.5 * e @ cov @ e - 0.5 * e @ lin)


def _tail_rates(params: ModelParams, eps1: float, eps2: float):
    """Decay rates of the damped price toward the four window edges.

    Payoff homogeneity fixes the rates toward large assets and small
    debt.  Toward the other two edges the rate is capped by the critical
    exponential moment of the state, which for a subordinated clock sits
    where the Laplace argument 1 + a*xi hits zero; on the deterministic
    clock the tails are Gaussian and effectively unbounded.
    """
    asset_up = -(1.0 + eps1)
    debt_down = eps2
    if params.tc.kind == "deterministic":
        return asset_up, math.inf, debt_down, math.inf
    a = params.tc.mean_jump
    crit_v = 0.5 * (1.0 + math.sqrt(1.0 + 8.0 / (a * params.sigma_v**2)))
    asset_down = crit_v + eps1
    if params.sigma_d > 0.0:
        crit_d = 0.5 * (-1.0 + math.sqrt(1.0 + 8.0 / (a * params.sigma_d**2)))
        debt_up = crit_d - eps2
    else:
        debt_up = math.inf
    return asset_up, asset_down, debt_down, debt_up


def _contour_admissible(params: ModelParams, eps1: float, eps2: float) -> bool:
    if not (eps2 > 0.0 and eps1 + eps2 < -1.02):
        return False
    if params.tc.kind == "deterministic":
        return True
    a = params.tc.mean_jump
    return 1.0 + a * _xi_floor(params, eps1, eps2) >= _CONTOUR_MARGIN


def default_contour(params: ModelParams) -> tuple[float, float]:
    """Admissible damping pair with the cheapest state window."""
    best = None
    for eps1 in _EPS1_CANDIDATES:
        for eps2 in _EPS2_CANDIDATES:
            if not _contour_admissible(params, eps1, eps2):
                continue
            rates = _tail_rates(params, eps1, eps2)
            if min(rates) < _MIN_TAIL_RATE:
                continue

            def width(up: float, down: float) -> float:
                return 4.5 + sum(8.5 / r for r in (up, down) if math.isfinite(r))

            w1 = width(rates[0], rates[1])
            w2 = width(rates[2], rates[3])
            w1 = max(w1, (_CORNER_MARGIN + rates[2] * w2) / rates[0])
            cost = w1 * w2
            if best is None or cost < best[0]:
                best = (cost, eps1, eps2)
    if best is None:
        raise DomainError(
            "no admissible damping contour: clock tails too heavy for the "
            "requested volatilities"
        )
    return best[1], best[2]


def _pow2_at_least(x: float, lo: int, hi: int) -> int:
    n = lo
    while n < x and n < hi:
        n *= 2
    return n


def _snap_up(lim: float, base: float = 1.5, step: float = 1.2) -> float:
    k = max(0, math.ceil(math.log(lim / base) / math.log(step) - 1e-9))
    return base * step**k


@dataclass(frozen=True)
class FourierPlan:
    """Frequency lattice, damping contour and state window of one pricing run."""

    n1: int
    n2: int
    du1: float
    du2: float
    eps1: float
    eps2: float
    x1_min: float
    x2_min: float

    def __post_init__(self) -> None:
        for n in (self.n1, self.n2):
            if n < 32 or (n & (n - 1)) != 0:
                raise ValueError(f"grid size must be a power of two >= 32, got {n}")
        if not (self.du1 > 0.0 and self.du2 > 0.0):
            raise ValueError("frequency spacings must be positive")
        if not self.eps2 > 0.0:
            raise ValueError("contour needs eps2 > 0")
        if not self.eps1 + self.eps2 < -1.0:
            raise ValueError("contour needs eps1 + eps2 < -1")

    @property
    def dx1(self) -> float:
        return 2.0 * math.pi / (self.n1 * self.du1)

    @property
    def dx2(self) -> float:
        return 2.0 * math.pi / (self.n2 * self.du2)

    @property
    def x1_max(self) -> float:
        return self.x1_min + self.n1 * self.dx1

    @property
    def x2_max(self) -> float:
        return self.x2_min + self.n2 * self.dx2

    @property
    def axis1(self) -> np.ndarray:
        return self.x1_min + self.dx1 * np.arange(self.n1)

    @property
    def axis2(self) -> np.ndarray:
        return self.x2_min + self.dx2 * np.arange(self.n2)

    def covers(self, v: np.ndarray, d: np.ndarray) -> bool:
        pad1, pad2 = 2.0 * self.dx1, 2.0 * self.dx2
        return bool(
            np.all(v >= self.x1_min + pad1)
            and np.all(v <= self.x1_max - pad1)
            and np.all(d >= self.x2_min + pad2)
            and np.all(d <= self.x2_max - pad2)
        )

    @classmethod
    def build(
        cls,
        params: ModelParams,
        T: float,
        cover=None,
        *,
        n1: int | None = None,
        n2: int | None = None,
        eps: tuple[float, float] | None = None,
        widen: float = 1.0,
        min_n: int = 512,
        max_n: int = 2048,
    ) -> "FourierPlan":
        """Size the lattice for ``params`` at maturity ``T``.

        ``cover`` lists extra (v, d) points the state window must contain,
        e.g. strike-shifted and mirrored initial states.  The window spans
        at least ten standard deviations of (v_T, d_T) plus the coverage,
        and enough multiples of every tail's decay rate that periodic
        images cannot leak back in; ``widen`` scales it up on retry.
        """
        if eps is None:
            eps1, eps2 = default_contour(params)
        else:
            eps1, eps2 = float(eps[0]), float(eps[1])
            if params.tc.kind != "deterministic":
                a = params.tc.mean_jump
                if 1.0 + a * _xi_floor(params, eps1, eps2) <= 0.0:
                    raise DomainError("requested contour leaves the clock domain")
        asset_up, asset_down, debt_down, debt_up = _tail_rates(params, eps1, eps2)
        if min(asset_up, asset_down, debt_down, debt_up) <= 0.0:
            raise DomainError("damped price does not decay for the requested contour")
        pts = np.atleast_2d(
            np.asarray(cover if cover is not None else [[params.v0, params.d0]], float)
        )
        root_t = math.sqrt(T)
        # the damped price peaks near the payoff kink (x1 ~ log 2, x2 ~ 0)
        # regardless of which states are read off, so tail pads are measured
        # from the union of the cover box and the kink region
        lo1 = min(pts[:, 0].min() - 0.75, -0.5)
        hi1 = max(pts[:, 0].max() + 0.75, 1.5)
        lo2 = min(pts[:, 1].min() - 0.75, -0.5)
        hi2 = max(pts[:, 1].max() + 0.75, 0.5)
        gauss1 = 10.0 * params.sigma_v * root_t
        gauss2 = 10.0 * params.sigma_d * root_t

        def pad(rate: float, gauss: float) -> float:
            span = 8.5 / rate if math.isfinite(rate) else 0.0
            return widen * max(span, gauss, 1.5)

        lo1 -= pad(asset_down, gauss1)
        hi1 += pad(asset_up, gauss1)
        lo2 -= pad(debt_down, gauss2)
        hi2 += pad(debt_up, gauss2)
        # widths snapped to a geometric ladder so the cached transform mesh
        # is shared across nearby parameter sets
        w1 = _snap_up(hi1 - lo1)
        w2 = _snap_up(hi2 - lo2)
        # the image of the deep in-the-money diagonal wrapped once through
        # both periods decays like exp((1+eps1)*W1 + eps2*W2); widen the
        # asset axis until that image cannot reach the covered states
        while (asset_up * w1 - debt_down * w2 < _CORNER_MARGIN
               and (hi1 + w1) - (hi2 + w2) > _CORNER_GATE):
            w1 *= 1.2
        dx_target = min(0.06, max(0.02, params.derived.sigma_x * root_t / 3.0))
        m1 = n1 if n1 is not None else _pow2_at_least(w1 / dx_target, min_n, max_n)
        m2 = n2 if n2 is not None else _pow2_at_least(w2 / dx_target, min_n, max_n)
        return cls(
            n1=m1,
            n2=m2,
            du1=2.0 * math.pi / w1,
            du2=2.0 * math.pi / w2,
            eps1=eps1,
            eps2=eps2,
            x1_min=lo1 - 0.5 * (w1 - (hi1 - lo1)),
            x2_min=lo2 - 0.5 * (w2 - (hi2 - lo2)),
        )


# ------------------------------------------------------------------ price grid


@dataclass(eq=False)
class PriceGrid:
    """Unit-strike spread prices over a lattice of initial log-states.

    ``values[i, j]`` is discount * E[(e^{v_T} - e^{d_T} - 1)^+] for the
    initial state (axis1[i], axis2[j]).  Strike-K prices are read off by
    homogeneity: shift the state by log of the discounted strike and
    scale. Bicubic interpolation serves off-lattice states.
    """

    plan: FourierPlan
    T: float
    discount: float
    values: np.ndarray
    _coeffs: np.ndarray | None = field(default=None, repr=False)

    @property
    def axis1(self) -> np.ndarray:
        return self.plan.axis1

    @property
    def axis2(self) -> np.ndarray:
        return self.plan.axis2

    def value_at(self, v, d):
        """Bicubic-interpolated grid value at states (v, d)."""
        v = np.asarray(v, dtype=float)
        d = np.asarray(d, dtype=float)
        if not self.plan.covers(v, d):
            raise DomainError("state outside the priced window; rebuild the plan")
        if self._coeffs is None:
            self._coeffs = ndimage.spline_filter(self.values, order=3, mode="mirror")
        i, j = np.broadcast_arrays(
            (v - self.plan.x1_min) / self.plan.dx1,
            (d - self.plan.x2_min) / self.plan.dx2,
        )
        flat = ndimage.map_coordinates(
            self._coeffs,
            np.vstack([np.ravel(i), np.ravel(j)]),
            order=3,
            prefilter=False,
            mode="mirror",
        )
        out = np.maximum(flat, 0.0).reshape(i.shape)
        return float(out) if out.ndim == 0 else out

    def strike_price(self, v0: float, d0: float, strike):
        """Spread price with strike ``K`` from state (v0, d0).

        Works through the homogeneity relation with the *discounted*
        strike, and clamps to the static arbitrage interval
        [max(S0 - K discount, 0), e^{v0}].
        """
        strike = np.asarray(strike, dtype=float)
        if np.any(strike <= 0.0):
            raise ValueError("strikes must be positive; K = 0 short-circuits to S0")
        keff = strike * self.discount
        shift = np.log(keff)
        raw = strike * self.value_at(v0 - shift, d0 - shift)
        s0 = math.exp(v0) - math.exp(d0)
        lower = np.maximum(s0 - keff, 0.0)
        return np.clip(raw, lower, math.exp(v0))


def price_vanilla_spread_grid(
    params: ModelParams,
    plan: FourierPlan,
    T: float,
    discount: float = 1.0,
    *,
    phi=None,
    check_box=None,
) -> PriceGrid:
    """Price unit-strike vanilla spreads for a whole lattice of states.

    ``phi`` overrides the characteristic function of the increments
    (v_T - v0, d_T - d0); by default it comes from ``params``.  Raises
    TruncationError when the integrand has not decayed at the lattice
    boundary (result would be untrustworthy).

    ``check_box`` = (v_lo, v_hi, d_lo, d_hi) narrows the aliasing check
    to the lattice edges that can actually wrap onto states inside the
    box.  Periodisation shifts one coordinate at a time by a full window
    length, so only edge segments sharing a row or column with the box
    matter; the default scans the whole frame.
    """
    n1, n2 = plan.n1, plan.n2
    w1 = (np.arange(n1) - n1 // 2) * plan.du1
    w2 = (np.arange(n2) - n2 // 2) * plan.du2
    u1 = (w1 + 1j * plan.eps1)[:, None]
    u2 = (w2 + 1j * plan.eps2)[None, :]
    cf = phi(u1, u2) if phi is not None else phi_increment(params, (u1, u2), T)
    integrand = cf * _transform_mesh(n1, n2, plan.du1, plan.du2, plan.eps1, plan.eps2)

    mags = np.abs(integrand)
    peak = mags.max()
    frame = max(mags[0, :].max(), mags[-1, :].max(), mags[:, 0].max(), mags[:, -1].max())
    if not np.isfinite(peak) or peak == 0.0:
        raise TruncationError("integrand degenerate on the frequency lattice")
    if frame > _BOUNDARY_DECAY * peak:
        raise TruncationError(
            f"integrand decayed to {frame / peak:.2e} of peak at the boundary; "
            "enlarge the frequency window"
        )

    jp1 = np.exp(1j * np.arange(n1) * plan.du1 * plan.x1_min)[:, None]
    jp2 = np.exp(1j * np.arange(n2) * plan.du2 * plan.x2_min)[None, :]
    total = np.fft.ifft2(integrand * jp1 * jp2) * (n1 * n2)
    signs1 = np.where(np.arange(n1) % 2 == 0, 1.0, -1.0)
    signs2 = np.where(np.arange(n2) % 2 == 0, 1.0, -1.0)
    kp1 = (np.exp(-1j * (n1 // 2) * plan.du1 * plan.x1_min) * signs1)[:, None]
    kp2 = (np.exp(-1j * (n2 // 2) * plan.du2 * plan.x2_min) * signs2)[None, :]
    weight = plan.du1 * plan.du2 / (4.0 * math.pi**2)
    damped = weight * (total * kp1 * kp2).real

    # state-side aliasing check.  Periodisation shifts a coordinate by a
    # full window length, so the image of an edge value lands at the far
    # side of the window, attenuated by that tail's decay rate over the
    # distance back to the states we read off.  Bound the total leakage
    # into check_box by the four attenuated edge maxima plus the image of
    # the in-the-money diagonal wrapped once through both periods.
    dmag = np.abs(damped)
    dpeak = dmag.max()
    checked = False
    if check_box is not None:
        v_lo, v_hi, d_lo, d_hi = check_box
        in_v = (plan.axis1 >= v_lo) & (plan.axis1 <= v_hi)
        in_d = (plan.axis2 >= d_lo) & (plan.axis2 <= d_hi)
        if in_v.any() and in_d.any():
            checked = True
            rates = _tail_rates(params, plan.eps1, plan.eps2)

            def leak(edge_max: float, rate: float, travel: float) -> float:
                if not math.isfinite(rate):
                    return 0.0
                return edge_max * math.exp(-rate * travel)

            pollution = (
                leak(dmag[-1, in_d].max(), rates[0], v_lo - plan.x1_min)
                + leak(dmag[0, in_d].max(), rates[1], plan.x1_max - v_hi)
                + leak(dmag[in_v, 0].max(), rates[2], plan.x2_max - d_hi)
                + leak(dmag[in_v, -1].max(), rates[3], d_lo - plan.x2_min)
            )
            x1s = v_hi + plan.n1 * plan.dx1
            x2s = d_hi + plan.n2 * plan.dx2
            if x1s - x2s > _CORNER_GATE:
                pollution += math.exp((1.0 + plan.eps1) * x1s + plan.eps2 * x2s)
            dbox = dmag[np.ix_(in_v, in_d)].max()
            if pollution > _WRAP_TOL * dbox:
                raise TruncationError(
                    f"periodic images may leak {pollution / dbox:.2e} of the "
                    "covered-state scale back in; enlarge the window"
                )
    if not checked:
        dedge = max(dmag[0, :].max(), dmag[-1, :].max(),
                    dmag[:, 0].max(), dmag[:, -1].max())
        if dedge > _EDGE_DECAY * dpeak:
            raise TruncationError(
                f"damped prices only decayed to {dedge / dpeak:.2e} of peak "
                "at the state boundary; enlarge the window"
            )

    with np.errstate(over="ignore"):
        undamp = np.exp(-plan.eps1 * plan.axis1)[:, None] * np.exp(
            -plan.eps2 * plan.axis2
        )[None, :]
        values = discount * undamp * damped
    if not np.all(np.isfinite(values)):
        raise TruncationError("non-finite prices on the state lattice")
    np.maximum(values, 0.0, out=values)
    return PriceGrid(plan=plan, T=T, discount=discount, values=values)


def covering_grid(
    params: ModelParams,
    T: float,
    strikes,
    discount: float = 1.0,
    *,
    mirror: bool = True,
    phi=None,
    n1: int | None = None,
    n2: int | None = None,
    eps: tuple[float, float] | None = None,
) -> PriceGrid:
    """One grid whose window covers every strike read-off for ``params``.

    Each strike K is read at the state shifted by log(K * discount);
    with ``mirror`` the state reflected across the default boundary is
    covered too, as needed by the knockout decomposition.  If the
    window-edge decay check trips, the window is widened and the
    transform repeated before giving up.
    """
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    if np.any(strikes <= 0.0):
        raise ValueError("strikes must be positive")
    shifts = np.log(strikes * discount)
    bases = [(params.v0, params.d0)]
    if mirror:
        mirrored = params.derived.reflect @ np.array([params.v0, params.d0])
        bases.append((float(mirrored[0]), float(mirrored[1])))
    cover = [(bv - s, bd - s) for (bv, bd) in bases for s in shifts]
    cover.extend(bases)
    cv = np.array([p[0] for p in cover])
    cd = np.array([p[1] for p in cover])
    box = (cv.min() - _BOX_PAD, cv.max() + _BOX_PAD,
           cd.min() - _BOX_PAD, cd.max() + _BOX_PAD)
    last_error: TruncationError | None = None
    for widen in _WIDEN_LADDER:
        plan = FourierPlan.build(params, T, cover, n1=n1, n2=n2, eps=eps, widen=widen)
        try:
            return price_vanilla_spread_grid(
                params, plan, T, discount, phi=phi, check_box=box
            )
        except TruncationError as exc:
            last_error = exc
    raise last_error


# ----------------------------------------------------- clock distribution


@dataclass(frozen=True, eq=False)
class TimeChangeDensity:
    """Cell-mass representation of the law of G_T.

    ``nodes`` are within-cell representative times (conditional means
    where available), ``masses`` the exact cell probabilities, and the
    atom sits at the clock's drift floor b*T.  Integration of a smooth
    function against the law is then a dot product.
    """

    tc: TimeChange
    T: float
    nodes: np.ndarray
    masses: np.ndarray
    widths: np.ndarray
    atom_weight: float
    atom_location: float

    @property
    def density(self) -> np.ndarray:
        """Cell-averaged density values (excludes the atom)."""
        with np.errstate(divide="ignore"):
            return self.masses / self.widths

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum() + self.atom_weight)

    def expect(self, fn) -> float:
        """E[fn(G_T)] by cell-mass summation plus the atom."""
        acc = float(np.dot(self.masses, fn(self.nodes))) if self.nodes.size else 0.0
        if self.atom_weight > 0.0:
            acc += self.atom_weight * float(fn(np.asarray([self.atom_location]))[0])
        return acc

    def mean(self) -> float:
        return self.expect(lambda g: g)


def _vg_cells(tc: TimeChange, T: float, n: int):
    # probability-spaced edges make every cell mass exact; conditional
    # means via the shape+1 incomplete-gamma identity
    shape = tc.c * T
    a = tc.mean_jump
    n_head = max(n - n // 8, 8)
    head = np.linspace(0.0, 0.9, n_head, endpoint=False)
    tail = 1.0 - np.geomspace(0.1, 1e-10, n // 8)
    levels = np.concatenate([head, tail])
    x_edges = gammaincinv(shape, levels)
    masses = np.diff(np.append(levels, 1.0))
    # conditional means via E[x 1{x > t}] = shape * Q(shape+1, t); use the
    # complement form in the tail where P saturates at 1
    p_part = np.diff(np.append(gammainc(shape + 1.0, x_edges), 1.0))
    q_part = -np.diff(np.append(gammaincc(shape + 1.0, x_edges), 0.0))
    mean_parts = np.where(levels + 0.5 * masses < 0.5, p_part, q_part)
    with np.errstate(invalid="ignore"):
        reps = shape * np.maximum(mean_parts, 0.0) / masses
    reps = np.where(mean_parts > 0.0, reps, x_edges)  # rounding fallback
    nodes = tc.b * T + a * reps
    widths = a * np.diff(np.append(x_edges, x_edges[-1] + 10.0 * (1.0 + shape)))
    return nodes, masses, widths


def _exp_jump_density(lam: float, a: float, x: np.ndarray) -> np.ndarray:
    # continuous part of a compound Poisson with Exp(a) jumps:
    # f(x) = e^{-lam - x/a} sqrt(lam/(a x)) I_1(2 sqrt(lam x / a))
    z = 2.0 * np.sqrt(lam * x / a)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(lam / (a * x)) * i1e(z) * np.exp(z - lam - x / a)
    return np.where(x > 0.0, val, lam / a * math.exp(-lam))


def _exp_cells(tc: TimeChange, T: float, n: int):
    lam = tc.c * T
    a = tc.mean_jump
    x_max = a * (lam + 12.0 * math.sqrt(2.0 * lam) + 45.0)
    x_edges = np.concatenate([[0.0], np.geomspace(x_max * 1e-8, x_max, n)])
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    lo, hi = x_edges[:-1], x_edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    xs = mid[:, None] + half[:, None] * gl_x[None, :]
    fs = _exp_jump_density(lam, a, xs)
    masses = half * (fs @ gl_w)
    with np.errstate(invalid="ignore"):
        reps = half * ((xs * fs) @ gl_w) / np.where(masses > 0.0, masses, 1.0)
    reps = np.where(masses > 0.0, reps, mid)
    # keep normalization exact: park the (tiny) tail residual in the last cell
    atom = math.exp(-lam)
    residual = 1.0 - atom - masses.sum()
    masses[-1] += max(residual, 0.0)
    nodes = tc.b * T + reps
    return nodes, masses, hi - lo


def _fourier_cells(tc: TimeChange, T: float, centers: np.ndarray):
    # generic route: cell-averaged inversion of the clock transform
    widths = np.diff(centers)
    if centers.size < 4 or not np.allclose(widths, widths[0], rtol=1e-8):
        raise ValueError("fourier inversion needs a uniform grid of cell centers")
    delta = float(widths[0])
    atom = tc.atom_weight(T)
    floor = tc.b * T
    theta_max = 64.0 / delta
    n_theta = 1 << 15
    theta = np.linspace(1e-9, theta_max, n_theta)
    phi_clock = np.exp(-laplace_exponent(tc, -1j * theta, T))
    phi_cont = phi_clock - atom * np.exp(1j * theta * floor)
    window = np.sinc(theta * delta / (2.0 * math.pi))  # np.sinc has the pi built in
    dens = np.empty_like(centers)
    chunk = 4096
    for lo in range(0, centers.size, chunk):
        cs = centers[lo : lo + chunk][:, None]
        kernel = np.exp(-1j * theta[None, :] * cs)
        vals = (kernel * (phi_cont * window)[None, :]).real
        dens[lo : lo + chunk] = np.trapezoid(vals, theta, axis=1) / math.pi
    if dens.min() < -1e-8:
        raise InversionQualityError(
            f"inverted clock density has negative lobes ({dens.min():.2e})"
        )
    dens = np.maximum(dens, 0.0)
    return centers, dens * delta, np.full_like(centers, delta)


def time_change_density(
    tc: TimeChange,
    T: float,
    g_grid: np.ndarray | None = None,
    *,
    n: int = 512,
    method: str = "auto",
) -> TimeChangeDensity:
    """Law of the business clock G_T as cell masses plus any atom.

    The default route uses the clock's known jump law (exact cell masses
    on a probability- or geometrically-graded grid).  ``method="fourier"``
    inverts exp(-psi(-i theta, T)) instead, on a uniform ``g_grid`` of
    cell centers; it is the generic fallback and a cross-check, but its
    transform decays too slowly in the small-c regime to be the default.
    """
    if method not in ("auto", "analytic", "fourier"):
        raise ValueError(f"unknown method {method!r}")
    if tc.kind == "deterministic":
        empty = np.empty(0)
        return TimeChangeDensity(tc, T, empty, empty, empty, 1.0, T)
    if method == "fourier":
        if g_grid is None:
            mean_jump_total = (1.0 - tc.b) * T
            span = mean_jump_total + 12.0 * tc.mean_jump * (1.0 + math.sqrt(tc.c * T)) + 2.0
            g_grid = tc.b * T + (np.arange(n) + 0.5) * (span / n)
        centers, masses, widths = _fourier_cells(tc, T, np.asarray(g_grid, float))
        return TimeChangeDensity(tc, T, centers, masses, widths, tc.atom_weight(T), tc.b * T)
    if g_grid is not None:
        raise ValueError("explicit g_grid is only supported with method='fourier'")
    if tc.kind == "vg":
        nodes, masses, widths = _vg_cells(tc, T, n)
        atom = 0.0
    else:
        nodes, masses, widths = _exp_cells(tc, T, n)
        atom = math.exp(-tc.c * T)
    return TimeChangeDensity(tc, T, nodes, masses, widths, atom, tc.b * T)
