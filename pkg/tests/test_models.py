import numpy as np
import pytest
from numpy.testing import assert_allclose

import oracles
from lrvtail.core import AutocovTable, bartlett_kernel, lugsail_kernel, sample_autocov, truncated_kernel
from lrvtail.generators import ARMA11, VARMA11, generate
from lrvtail.models import (
    AR1Model,
    ARMA11Model,
    ARModel,
    MAModel,
    VAR1Model,
    fit_ar1,
    fit_arma11,
    fit_arp,
    fit_maq,
    fit_var1,
    model_autocov,
    model_from_dict,
    model_lrv,
    model_M,
    model_vp,
    safe_ratio,
)

SCALAR_MODELS = [
    AR1Model(0.5),
    AR1Model(-0.8, 2.0),
    ARMA11Model(0.6, -0.3),
    ARMA11Model(-0.4, 0.7, 0.5),
    MAModel([0.4, -0.2, 0.1]),
    ARModel([0.5, 0.2]),
]
IDS = [repr(m) for m in SCALAR_MODELS]


class TestFitAR1:
    def test_white_noise_acf(self):
        m = fit_ar1(AutocovTable(np.array([1.0, 0.0]), 10))
        assert m.phi == 0.0
        assert m.innovation_var == 1.0

    def test_direct_ratio(self):
        m = fit_ar1(AutocovTable(np.array([2.0, 1.0]), 10))
        assert m.phi == 0.5
        assert_allclose(m.autocovs(0)[0], 2.0, rtol=1e-15)

    def test_clamp(self):
        m = fit_ar1(AutocovTable(np.array([1.0, 0.9999999]), 10))
        assert m.phi == 1.0 - 1e-6

    def test_from_series(self):
        x = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
        g = sample_autocov(x, 1).gammas
        assert fit_ar1(x).phi == g[1] / g[0]

    def test_degenerate(self):
        with pytest.raises(ValueError):
            fit_ar1(np.ones(5))


class TestFitARMA11:
    @pytest.mark.parametrize("a,b", [(0.5, 0.3), (0.0, 0.0), (0.8, 0.0)])
    def test_recovery(self, a, b):
        x = generate(ARMA11(a, b), 10000, seed=11)
        m = fit_arma11(x)
        assert abs(m.a - a) < 0.1
        assert abs(m.b - b) < 0.1
        assert m.innovation_var == pytest.approx(1.0, rel=0.05)


class TestFitVAR1:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal((10000, 2))
        assert np.max(np.abs(fit_var1(x).Phi)) < 0.05

    def test_d1_matches_ar1(self):
        x = generate(ARMA11(0.6, 0.0), 500, seed=1)
        g = sample_autocov(x, 1).gammas
        assert_allclose(fit_var1(x[:, None]).Phi[0, 0], g[1] / g[0], rtol=1e-13)

    def test_recovery(self):
        gen = VARMA11(np.diag([0.7, 0.7]), np.zeros((2, 2)), np.eye(2))
        x = generate(gen, 10000, seed=2)
        assert_allclose(fit_var1(x).Phi, np.diag([0.7, 0.7]), atol=0.1)

    def test_convention(self):
        # Phi = Gamma~_1 Gamma~_0^{-1} with Gamma~_1 = mean of X_i X_{i-1}^T
        x = np.random.default_rng(3).standard_normal((200, 3)).cumsum(0) * 0.1
        x += np.random.default_rng(4).standard_normal((200, 3))
        g0, g1 = oracles.cross_autocov(x, 0), oracles.cross_autocov(x, 1)
        assert_allclose(fit_var1(x).Phi, g1 @ np.linalg.inv(g0), rtol=1e-10)


class TestFitOthers:
    def test_maq_matches_moments(self):
        x = generate(ARMA11(0.0, 0.5), 5000, seed=5)
        m = fit_maq(x, 2)
        assert_allclose(m.autocovs(2), sample_autocov(x, 2).gammas, rtol=1e-6)

    def test_maq_invalid_moments_warn(self):
        from lrvtail.models import FitWarning
        # lag-1 correlation -0.9 is beyond any MA(1)
        x = np.tile([1.0, -1.0], 50) + 0.01 * np.random.default_rng(0).standard_normal(100)
        with pytest.warns(FitWarning):
            m = fit_maq(x, 1)
        assert m.lrv() > 0

    def test_arp_yule_walker(self):
        x = generate(ARMA11(0.5, 0.0), 20000, seed=6)
        m = fit_arp(x, 2)
        assert_allclose(m.phis, [0.5, 0.0], atol=0.05)


class TestModelQuantities:
    def test_ar1_white_noise(self):
        m = AR1Model(0.0)
        assert_allclose(m.autocovs(3), [1.0, 0.0, 0.0, 0.0])
        assert m.lrv() == 1.0
        assert m.vp(1) == 0.0

    def test_arma11_values(self):
        m = ARMA11Model(0.5, 0.0)
        assert_allclose(m.autocovs(0)[0], 4 / 3, rtol=1e-14)
        assert_allclose(m.lrv(), 4.0, rtol=1e-14)

    def test_arma_cancellation(self):
        m = ARMA11Model(0.5, -0.5)
        assert_allclose(m.vp(1), 0.0, atol=1e-14)
        assert_allclose(m.lrv(), 1.0, rtol=1e-14)

    def test_ar1_kappa(self):
        assert_allclose(AR1Model(0.5).kappa(1), 4 / 3, rtol=1e-14)

    def test_ar1_simulated_autocov(self):
        x = generate(ARMA11(0.5, 0.0), 10**6, seed=7)
        g = sample_autocov(x, 5).gammas
        assert_allclose(g, AR1Model(0.5).autocovs(5), atol=0.01)

    @pytest.mark.parametrize("m", SCALAR_MODELS, ids=IDS)
    def test_autocovs_match_oracle(self, m):
        if isinstance(m, ARMA11Model):
            want = [oracles.arma11_gamma(m.a, m.b, k, m.innovation_var) for k in range(6)]
            assert_allclose(m.autocovs(5), want, rtol=1e-13)
        if isinstance(m, AR1Model):
            want = [oracles.ar1_gamma(m.phi, k, m.innovation_var) for k in range(6)]
            assert_allclose(m.autocovs(5), want, rtol=1e-13)

    @pytest.mark.parametrize("m", SCALAR_MODELS, ids=IDS)
    def test_lrv_and_vp_truncated_sum(self, m):
        g = m.autocovs(5000)
        assert abs(g[-1]) < 1e-14
        k = np.arange(1, 5001)
        assert_allclose(m.lrv(), g[0] + 2 * g[1:].sum(), rtol=1e-10)
        assert_allclose(m.vp(1), 2 * (k * g[1:]).sum(), rtol=1e-10, atol=1e-12)
        assert_allclose(m.vp(2), 2 * (k**2 * g[1:]).sum(), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("m", SCALAR_MODELS, ids=IDS)
    @pytest.mark.parametrize("ell", [1, 2, 5, 10, 50])
    @pytest.mark.parametrize("K", [bartlett_kernel(), truncated_kernel(), lugsail_kernel()],
                             ids=lambda k: k.name)
    def test_M_bruteforce(self, m, ell, K):
        g = m.autocovs(ell)
        want = sum(float(K(k / ell)) * g[abs(k)] for k in range(-ell, ell + 1))
        assert_allclose(m.M(K, ell), want, rtol=1e-10)

    def test_M_example(self):
        K = bartlett_kernel()
        assert_allclose(AR1Model(0.0).M(K, 7), 1.0, rtol=1e-15)
        assert_allclose(AR1Model(0.5).M(K, 4), oracles.ar1_M(0.5, K, 4), rtol=1e-12)

    def test_truncated_zero_M(self):
        m = AR1Model(-0.5, 2.0)
        K = truncated_kernel()
        assert m.M(K, 1) == 0.0
        assert m.eta(K, 1) == 1.0
        assert_allclose(m.M(K, 3), m.autocovs(3)[0] + 2 * m.autocovs(3)[1:].sum(), rtol=1e-14)

    @pytest.mark.parametrize("phi", np.linspace(-0.9, 0.9, 7))
    def test_M_limit(self, phi):
        m = AR1Model(phi)
        assert abs(m.M(bartlett_kernel(), 10**4) - m.lrv()) / m.lrv() < 1e-3

    def test_M_nonnegative_psd(self):
        K = bartlett_kernel()
        for phi in np.linspace(-0.99, 0.99, 41):
            for ell in (1, 2, 3, 7, 20, 100):
                assert AR1Model(phi).M(K, ell) >= 0
        for a in np.linspace(-0.9, 0.9, 7):
            for b in np.linspace(-0.9, 0.9, 7):
                for ell in (1, 3, 10):
                    assert ARMA11Model(a, b).M(K, ell) >= -1e-12

    def test_kappa_odd(self):
        for phi in np.linspace(-0.95, 0.95, 39):
            assert_allclose(AR1Model(-phi).kappa(1), -AR1Model(phi).kappa(1), atol=1e-12)

    def test_functional_aliases(self):
        m = ARMA11Model(0.3, 0.2)
        assert model_autocov(m, 2) == m.autocovs(2)[2]
        assert model_lrv(m) == m.lrv()
        assert model_vp(m, 1) == m.vp(1)
        assert model_M(m, bartlett_kernel(), 3) == m.M(bartlett_kernel(), 3)

    def test_spectrum_closed_form(self):
        for m in SCALAR_MODELS[:4]:
            w = np.array([0.0, 0.7, 2.0, np.pi])
            want = [m.autocovs(0)[0] + 2 * sum(m.autocovs(3000)[1:] * np.cos(np.arange(1, 3001) * x)) for x in w]
            assert_allclose(m.spectrum(w), want, rtol=1e-9)

    def test_admissibility(self):
        with pytest.raises(ValueError):
            AR1Model(1.0)
        with pytest.raises(ValueError):
            ARMA11Model(0.5, 1.0)
        with pytest.raises(ValueError):
            ARModel([0.5, 0.6])
        with pytest.raises(ValueError):
            VAR1Model(np.diag([1.0, 0.2]), np.eye(2))

    def test_round_trip(self):
        for m in SCALAR_MODELS + [VAR1Model(np.diag([0.3, 0.5]), np.eye(2))]:
            back = model_from_dict(m.to_dict())
            assert_allclose(np.asarray(back.lrv()), np.asarray(m.lrv()), rtol=1e-14)

    def test_safe_ratio(self):
        assert safe_ratio(3.0, 0.0) == 1.0
        assert safe_ratio(3.0, 2.0) == 1.5


class TestVAR1:
    PHI = np.array([[0.5, 0.2], [-0.1, 0.6]])
    SIG = np.array([[1.0, 0.3], [0.3, 2.0]])

    def test_lyapunov_residual(self):
        m = VAR1Model(self.PHI, self.SIG)
        g0 = m.gamma0
        assert_allclose(g0 - self.PHI @ g0 @ self.PHI.T, self.SIG, atol=1e-10)
        assert_allclose(g0, oracles.lyapunov_vec(self.PHI, self.SIG), atol=1e-12)

    def test_autocov_convention(self):
        m = VAR1Model(self.PHI, self.SIG)
        for k in (-3, -1, 0, 2):
            assert_allclose(m.autocov(k), oracles.var1_gamma(self.PHI, self.SIG, k), atol=1e-12)

    @pytest.mark.parametrize("rho", [0.3, 0.9])
    def test_closed_forms_vs_truncated(self, rho):
        Phi = np.array([[rho, 0.0], [0.2, rho * 0.5]])
        m = VAR1Model(Phi, self.SIG)
        assert_allclose(m.lrv(), oracles.var1_truncated(Phi, self.SIG, 0), atol=1e-8)
        assert_allclose(m.vp(1), oracles.var1_truncated(Phi, self.SIG, 1), atol=1e-8)
        assert_allclose(m.vp(2), oracles.var1_truncated(Phi, self.SIG, 2), atol=1e-6, rtol=1e-10)

    def test_M_bruteforce(self):
        m = VAR1Model(self.PHI, self.SIG)
        K = bartlett_kernel()
        want = sum(float(K(k / 6)) * oracles.var1_gamma(self.PHI, self.SIG, k) for k in range(-6, 7))
        assert_allclose(m.M(K, 6), want, atol=1e-12)

    @pytest.mark.parametrize("phi", [-0.7, 0.0, 0.4, 0.95])
    def test_d1_reduces_to_ar1(self, phi):
        v, a = VAR1Model([[phi]], [[1.7]]), AR1Model(phi, 1.7)
        K = bartlett_kernel()
        for got, want in [(v.lrv(), a.lrv()), (v.vp(1), a.vp(1)), (v.gamma0, a.autocovs(0)[0]),
                          (v.M(K, 5), a.M(K, 5)), (v.autocov(3), a.autocov(3))]:
            assert_allclose(np.asarray(got).ravel()[0], want, rtol=1e-12)
