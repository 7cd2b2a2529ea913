"""Clock Laplace exponents, derived coefficients, characteristic functions."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from capstruct.errors import DomainError
from capstruct.model import (
    FirmState,
    ModelParams,
    TimeChange,
    laplace_exponent,
    phi_gbm,
    phi_increment,
    phi_lsbm,
)

VG = TimeChange.vg(0.6948, 0.0240)
EXP = TimeChange.exp_jumps(0.7232, 0.0416)
DET = TimeChange.deterministic()


def _params(**kw):
    base = dict(sigma_v=0.2433, sigma_d=0.1344, rho=-0.0699, v0=3.1796, d0=2.5036)
    base.update(kw)
    return ModelParams(**base)


class TestTimeChange:
    def test_mean_jump(self):
        assert_allclose(VG.mean_jump, (1 - 0.6948) / 0.0240, rtol=1e-15)
        assert_allclose(EXP.mean_jump, (1 - 0.7232) / 0.0416, rtol=1e-15)

    def test_atom_weight(self):
        # only the compound Poisson clock leaves mass at g = bT
        assert EXP.atom_weight(2.0) == pytest.approx(math.exp(-0.0416 * 2.0), rel=1e-15)
        assert VG.atom_weight(2.0) == 0.0
        assert DET.atom_weight(2.0) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            TimeChange.vg(0.0, 0.1)
        with pytest.raises(ValueError):
            TimeChange.vg(1.0, 0.1)
        with pytest.raises(ValueError):
            TimeChange.exp_jumps(0.5, 0.0)


class TestLaplaceExponent:
    def test_zero_frequency(self):
        for tc in (VG, EXP, DET):
            assert laplace_exponent(tc, 0.0, 2.5) == pytest.approx(0.0, abs=1e-300)

    def test_unit_mean_normalization(self):
        # d/du psi(u, t) at u = 0 equals t for every clock
        h = 1e-6
        for tc in (VG, EXP, DET):
            for t in (0.5, 3.0):
                slope = (laplace_exponent(tc, h, t) - laplace_exponent(tc, -h, t)).real / (2 * h)
                assert_allclose(slope, t, rtol=1e-8)

    def test_vg_against_quadrature(self):
        # E[exp(-u G_T)] integrated against the gamma density of G_T - bT
        a = VG.mean_jump
        for u in (0.5, 2.0, 7.0):
            for t in (0.7, 4.0):
                dens = stats.gamma(a=VG.c * t, scale=a)
                mgf, err = integrate.quad(lambda x: math.exp(-u * x) * dens.pdf(x), 0, np.inf)
                assert err < 1e-7  # integrable power singularity at zero caps quad accuracy
                expected = -math.log(mgf) + u * VG.b * t
                assert_allclose(laplace_exponent(VG, u, t).real, expected, rtol=1e-6)

    def test_exp_against_poisson_sum(self):
        # compound Poisson with exponential jumps, summed term by term
        a = EXP.mean_jump
        for u in (0.5, 2.0, 7.0):
            t = 3.0
            lam = EXP.c * t
            mgf = sum(
                stats.poisson.pmf(k, lam) * (1 + a * u) ** (-k) for k in range(80)
            )
            expected = -math.log(mgf) + u * EXP.b * t
            assert_allclose(laplace_exponent(EXP, u, t).real, expected, rtol=1e-12)

    def test_series_branch_is_continuous(self):
        a = VG.mean_jump
        for scale in (0.99e-4, 1.01e-4):
            u = scale / a
            lo = laplace_exponent(VG, u, 1.0)
            assert_allclose(lo.real, 1.0 * (VG.b * u + VG.c * math.log1p(a * u)), rtol=1e-10)

    def test_domain_error_left_of_singularity(self):
        u = -1.2 / VG.mean_jump
        with pytest.raises(DomainError):
            laplace_exponent(VG, u, 1.0)


class TestDerivedCoefficients:
    def test_rotation_identities(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            sv = rng.uniform(0.05, 0.6)
            sd = rng.uniform(0.0, 0.5)
            rho = rng.uniform(-0.95, 0.95)
            if abs(rho * sv * sd - sd**2) < 1e-4:
                continue  # the decoupling is singular there, tested separately
            p = _params(sigma_v=sv, sigma_d=sd, rho=rho)
            der = p.derived
            assert_allclose(der.sigma_x**2, sv**2 - 2 * rho * sv * sd + sd**2, rtol=1e-12)
            assert_allclose(der.rho_vx**2 + der.rho_vx_orth**2, 1.0, rtol=1e-12)
            assert_allclose(der.rho_dx**2 + der.rho_dx_orth**2, 1.0, rtol=1e-12)
            assert_allclose(
                der.rho_vx * der.rho_dx + der.rho_vx_orth * der.rho_dx_orth,
                rho, rtol=1e-10, atol=1e-12,
            )
            # the first factor recovers the default distance, the second none of it
            assert_allclose(sv * der.rho_vx - sd * der.rho_dx, der.sigma_x, rtol=1e-12)
            assert_allclose(sv * der.rho_vx_orth - sd * der.rho_dx_orth, 0.0, atol=1e-14)
            # drift loadings keep both discounted exponentials martingales
            assert_allclose(
                sv * (der.rho_vx * der.alpha + der.rho_vx_orth * der.alpha_perp),
                -0.5 * sv**2, rtol=1e-10, atol=1e-14,
            )
            assert_allclose(
                sd * (der.rho_dx * der.alpha + der.rho_dx_orth * der.alpha_perp),
                -0.5 * sd**2, rtol=1e-10, atol=1e-14,
            )

    def test_reflection_matrix_is_involutive_and_flips_distance(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            sv = rng.uniform(0.05, 0.6)
            sd = rng.uniform(0.01, 0.5)
            rho = rng.uniform(-0.9, 0.9)
            if abs(rho * sv * sd - sd**2) < 1e-4:
                continue
            reflect = np.asarray(_params(sigma_v=sv, sigma_d=sd, rho=rho).derived.reflect)
            assert_allclose(reflect @ reflect, np.eye(2), atol=1e-10)
            y = rng.uniform(-1, 1, size=2)
            image = reflect @ y
            assert_allclose(image[0] - image[1], -(y[0] - y[1]), rtol=1e-9, atol=1e-12)

    def test_reflection_fixes_the_boundary(self):
        reflect = np.asarray(_params().derived.reflect)
        y = np.array([0.7, 0.7])  # v = d is the default boundary
        assert_allclose(reflect @ y, y, rtol=1e-12)

    def test_zero_debt_volatility_limit(self):
        der = _params(sigma_d=0.0).derived
        assert_allclose(np.asarray(der.reflect), [[-1.0, 2.0], [0.0, 1.0]], atol=1e-14)

    def test_singular_decoupling_raises(self):
        # rho * sv * sd == sd**2 has no independent second factor
        with pytest.raises(DomainError):
            _ = _params(sigma_v=0.2, sigma_d=0.1, rho=0.5).derived


class TestModelParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            _params(sigma_v=0.0)
        with pytest.raises(ValueError):
            _params(rho=1.0)
        with pytest.raises(ValueError):
            _params(v0=2.0, d0=2.5)  # insolvent start
        with pytest.raises(ValueError):
            _params(recovery=1.0)

    def test_state_and_covariance(self):
        p = _params()
        assert p.state == FirmState(3.1796, 2.5036)
        cov = np.asarray(p.covariance)
        assert_allclose(cov[0, 0], p.sigma_v**2, rtol=1e-15)
        assert_allclose(cov[1, 1], p.sigma_d**2, rtol=1e-15)
        assert_allclose(cov[0, 1], p.rho * p.sigma_v * p.sigma_d, rtol=1e-15)
        assert_allclose(cov[0, 1], cov[1, 0], rtol=1e-15)

    def test_with_state(self):
        p = _params().with_state(3.4, 2.6)
        assert (p.v0, p.d0) == (3.4, 2.6)
        assert p.sigma_v == 0.2433


class TestCharacteristicFunctions:
    def test_normalization(self):
        p = _params()
        q = ModelParams(sigma_v=p.sigma_v, sigma_d=p.sigma_d, rho=p.rho,
                        tc=VG, v0=p.v0, d0=p.d0)
        assert_allclose(phi_gbm(p, (0.0, 0.0), 1.0), 1.0, rtol=1e-14)
        assert_allclose(phi_lsbm(q, (0.0, 0.0), 1.0), 1.0, rtol=1e-14)

    def test_martingale_points(self):
        # analytic continuation to u = -i recovers the initial exponentials
        p = _params()
        assert_allclose(phi_gbm(p, (-1j, 0.0), 2.0), math.exp(p.v0), rtol=1e-12)
        assert_allclose(phi_gbm(p, (0.0, -1j), 2.0), math.exp(p.d0), rtol=1e-12)
        for tc in (VG, EXP):
            q = ModelParams(sigma_v=0.2, sigma_d=0.12, rho=-0.1, tc=tc, v0=3.0, d0=2.4)
            assert_allclose(phi_lsbm(q, (-1j, 0.0), 2.0), math.exp(3.0), rtol=1e-12)
            assert_allclose(phi_lsbm(q, (0.0, -1j), 2.0), math.exp(2.4), rtol=1e-12)

    def test_deterministic_clock_reduces_to_gbm(self):
        p = _params()
        q = ModelParams(sigma_v=p.sigma_v, sigma_d=p.sigma_d, rho=p.rho,
                        tc=DET, v0=p.v0, d0=p.d0)
        for u in ((0.4, -1.1), (2.0, 0.7), (-3.0, 0.2)):
            assert_allclose(phi_lsbm(q, u, 1.7), phi_gbm(p, u, 1.7), rtol=1e-13)

    def test_gbm_against_simulation(self):
        p = _params()
        T = 1.3
        rng = np.random.default_rng(21)
        n = 400_000
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        # direct bivariate lognormal construction, no shared code path
        v = p.v0 - 0.5 * p.sigma_v**2 * T + p.sigma_v * math.sqrt(T) * z1
        wd = p.rho * z1 + math.sqrt(1 - p.rho**2) * z2
        d = p.d0 - 0.5 * p.sigma_d**2 * T + p.sigma_d * math.sqrt(T) * wd
        for u1, u2 in ((0.5, -0.3), (1.2, 0.7), (-0.8, 0.25)):
            samples = np.exp(1j * (u1 * v + u2 * d))
            se = samples.std() / math.sqrt(n)
            got = phi_gbm(p, (u1, u2), T)
            assert abs(got - samples.mean()) < 4 * se

    def test_lsbm_against_clock_mixture(self):
        from capstruct.mc import simulate_clock

        q = ModelParams(sigma_v=0.2005, sigma_d=0.1473, rho=-0.0143, tc=VG,
                        v0=3.3393, d0=2.4973)
        rng = np.random.default_rng(22)
        g = simulate_clock(VG, 1.0, 400_000, rng)
        for u in ((0.6, -0.2), (1.5, 0.9)):
            cond = phi_gbm(q, u, g)
            se = cond.std() / math.sqrt(g.size)
            assert abs(phi_lsbm(q, u, 1.0) - cond.mean()) < 4 * se

    def test_factorization(self):
        q = ModelParams(sigma_v=0.2, sigma_d=0.12, rho=-0.1, tc=VG, v0=3.0, d0=2.4)
        u = (0.7, -1.4)
        full = phi_lsbm(q, u, 2.0)
        incr = phi_increment(q, u, 2.0)
        assert_allclose(full, np.exp(1j * (u[0] * q.v0 + u[1] * q.d0)) * incr, rtol=1e-13)

    def test_overflow_raises(self):
        with pytest.raises(DomainError):
            phi_gbm(_params(), (0.0 - 900j, 0.0), 5.0)
