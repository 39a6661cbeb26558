import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dejitter_lab.jitter import Ar1Params, ar1_generate
from dejitter_lab.mle import (
    LikelihoodDegenerateError,
    MleProblem,
    default_bounds,
    estimate_parameters,
    kms_covariance,
    kms_inverse_tridiag,
    kms_logdet,
    neg_loglik_dense,
    neg_loglik_fast,
)
from dejitter_lab.pilots import PseudoMeasurements


def synthetic_problem(M, k_gap, theta, seed, **kw):
    """Pseudo-measurements drawn from the model they are fitted with."""
    rng = np.random.default_rng(seed)
    se, phi, sw = theta
    xi = ar1_generate(Ar1Params(phi, se), M * (k_gap + 1), seed=rng).xi[:: k_gap + 1]
    d2 = rng.uniform(0.5, 2.0, M) ** 2
    m = xi + sw / np.sqrt(d2) * rng.standard_normal(M)
    return MleProblem(m, d2, k_gap, **kw)


def random_theta(rng):
    return (math.exp(rng.uniform(-3, 0)), rng.uniform(0.9, 0.9999), math.exp(rng.uniform(-2, 1)))


class TestKms:
    def test_single_element(self):
        assert kms_logdet(0.9, 0.5, 3, 1) == pytest.approx(math.log(0.25 / 0.19), rel=1e-14)

    def test_logdet_dense(self):
        cov = kms_covariance(0.9, 0.7, np.full(4, 4.0))
        assert kms_logdet(0.9, 0.7, 3, 5) == pytest.approx(np.linalg.slogdet(cov)[1], rel=1e-10)

    def test_logdet_diagonal_limit(self):
        assert kms_logdet(1e-12, 0.3, 2, 7) == pytest.approx(7 * math.log(0.09), rel=1e-9)

    def test_logdet_near_unit_root(self):
        cov = kms_covariance(0.99999, 1e-3, np.full(63, 100.0))
        assert kms_logdet(0.99999, 1e-3, 99, 64) == pytest.approx(np.linalg.slogdet(cov)[1],
                                                                  rel=1e-8)

    def test_inverse_two_by_two(self):
        phi, se, k = 0.8, 0.5, 2
        t = kms_inverse_tridiag(phi, se, k, 2)
        scale = (1 - phi**2) / (se**2 * (1 - phi ** (2 * (k + 1))))
        np.testing.assert_allclose(t.diag, [scale, scale], rtol=1e-14)
        np.testing.assert_allclose(t.off, [-(phi ** (k + 1)) * scale], rtol=1e-14)

    def test_inverse_product_identity(self):
        phi, se, k, M = 0.999, 1.0, 19, 16
        prod = kms_covariance(phi, se, np.full(M - 1, k + 1.0)) @ kms_inverse_tridiag(
            phi, se, k, M).to_dense()
        np.testing.assert_allclose(prod, np.eye(M), atol=1e-8)

    def test_inverse_decorrelated_limit(self):
        phi, se = 0.5, 2.0
        t = kms_inverse_tridiag(phi, se, 200, 5)
        np.testing.assert_allclose(t.diag, (1 - phi**2) / se**2, rtol=1e-12)
        np.testing.assert_allclose(t.off, 0.0, atol=1e-60)

    def test_matvec(self, rng):
        t = kms_inverse_tridiag(0.95, 0.3, 4, 9)
        v = rng.standard_normal(9)
        np.testing.assert_allclose(t.matvec(v), t.to_dense() @ v, rtol=1e-13)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            kms_logdet(0.9, 1.0, 1, 0)
        with pytest.raises(ValueError):
            kms_inverse_tridiag(0.9, 1.0, 1, 0)


class TestProblem:
    def test_validation(self):
        with pytest.raises(ValueError):
            MleProblem(np.zeros(2), np.ones(2), 1)
        with pytest.raises(ValueError):
            MleProblem(np.zeros(4), np.ones(3), 1)
        with pytest.raises(ValueError):
            MleProblem(np.zeros(4), np.array([1, 1, 0, 1.0]), 1)
        with pytest.raises(ValueError):
            MleProblem(np.ones(4), np.ones(4), 1, bounds=((1, 2), (0.5, 1.0), (0, 1)))

    def test_uniform_lags_default(self):
        p = MleProblem(np.ones(5), np.ones(5), 9)
        np.testing.assert_array_equal(p.lags, 10.0)

    def test_default_bounds_contain_phi_range(self, rng):
        (el, eh), (pl, ph), (wl, wh) = default_bounds(rng.standard_normal(50), np.ones(50))
        assert (pl, ph) == (0.9, 0.99999)
        assert 0 < el < eh and 0 < wl < wh

    def test_flagged_pilots_merge_gaps(self):
        idx = np.arange(0, 100, 10)
        rel = np.ones(10, dtype=bool)
        rel[[3, 4]] = False
        meas = PseudoMeasurements(idx, np.arange(10.0), np.full(10, 2.0), rel, 0.0)
        p = MleProblem.from_measurements(meas, 9)
        assert p.M == 8
        np.testing.assert_array_equal(p.lags, [10, 10, 30, 10, 10, 10, 10])
        np.testing.assert_array_equal(p.deriv_sq, 4.0)


class TestLikelihood:
    def test_dense_oracle_random_draws(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            M = int(rng.integers(3, 257))
            k = int(rng.integers(0, 100))
            th = random_theta(rng)
            p = synthetic_problem(M, k, random_theta(rng), int(rng.integers(1 << 30)))
            fast, dense = neg_loglik_fast(p, th), neg_loglik_dense(p, th)
            assert fast == pytest.approx(dense, rel=1e-8)

    def test_noise_free_reduces_to_ar1(self):
        p = synthetic_problem(512, 19, (0.01, 0.999, 0.0), 1)
        th = (0.01, 0.999, 0.0)
        assert neg_loglik_fast(p, th) == pytest.approx(neg_loglik_dense(p, th), rel=1e-8)

    def test_large_problem_dense_oracle(self):
        rng = np.random.default_rng(2)
        p = synthetic_problem(2048, 9, (0.05, 0.995, 0.3), 3)
        th = random_theta(rng)
        assert neg_loglik_fast(p, th) == pytest.approx(neg_loglik_dense(p, th), rel=1e-8)

    def test_non_uniform_gaps(self, rng):
        p = synthetic_problem(40, 4, (0.1, 0.99, 0.2), 4)
        p.lags = rng.integers(1, 30, p.M - 1).astype(float)
        th = (0.1, 0.99, 0.2)
        assert neg_loglik_fast(p, th) == pytest.approx(neg_loglik_dense(p, th), rel=1e-8)

    def test_ar1params_argument(self):
        p = synthetic_problem(30, 4, (0.1, 0.99, 0.2), 5)
        assert neg_loglik_fast(p, Ar1Params(0.99, 0.1, 0.2)) == neg_loglik_fast(p, (0.1, 0.99, 0.2))

    @pytest.mark.parametrize("th", [(0.1, 1.0, 0.2), (0.0, 0.9, 0.2), (0.1, -0.5, 0.2),
                                    (0.1, 0.99, np.nan)])
    def test_invalid_theta_is_infinite(self, th):
        p = synthetic_problem(30, 4, (0.1, 0.99, 0.2), 6)
        assert neg_loglik_fast(p, th) == math.inf

    @given(seed=st.integers(0, 10**6))
    def test_sign_flip_invariance(self, seed):
        rng = np.random.default_rng(seed)
        p = synthetic_problem(64, 3, random_theta(rng), seed)
        q = MleProblem(-p.m_tilde, p.deriv_sq, p.k_gap, bounds=p.bounds)
        th = random_theta(rng)
        assert neg_loglik_fast(q, th) == pytest.approx(neg_loglik_fast(p, th), rel=1e-12)

    def test_linear_time(self, doubling_ratio):
        def make(M):
            p = synthetic_problem(M, 19, (0.01, 0.999, 0.01), 7)
            th = (0.01, 0.999, 0.01)

            def run():
                for _ in range(20):
                    neg_loglik_fast(p, th)

            return run

        ratio = doubling_ratio(make, 2**15)
        assert 1.6 <= ratio <= 2.5, ratio


def _z_gradient(p, theta, h=1e-5):
    """Central differences in (log sigma_eps, logit phi, log sigma_w)."""
    se, phi, sw = theta
    z = np.array([math.log(se), math.log(phi / (1 - phi)), math.log(sw)])

    def f(zz):
        return neg_loglik_fast(p, (math.exp(zz[0]), 1 / (1 + math.exp(-zz[1])), math.exp(zz[2])))

    g = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


class TestEstimate:
    def test_recovers_parameters(self):
        truth = (0.02, 0.995, 0.3)
        p = synthetic_problem(3000, 9, truth, 8, starts=8)
        res = estimate_parameters(p, seed=0)
        th = res.theta_hat
        assert th.phi == pytest.approx(0.995, abs=0.004)
        assert th.sigma_w == pytest.approx(0.3, rel=0.1)
        assert th.sigma_xi == pytest.approx(truth[0] / math.sqrt(1 - 0.995**2), rel=0.35)
        assert res.starts_tried == 8 and len(res.converged_flags) == 8
        assert math.isfinite(res.neg_loglik)

    def test_result_within_bounds(self):
        p = synthetic_problem(500, 9, (0.02, 0.995, 0.3), 9, starts=4)
        th = estimate_parameters(p, seed=1).theta_hat
        (el, eh), (pl, ph), (wl, wh) = p.bounds
        assert el * (1 - 1e-12) <= th.sigma_eps <= eh * (1 + 1e-12)
        assert pl - 1e-12 <= th.phi <= ph + 1e-12
        assert wl * (1 - 1e-12) <= th.sigma_w <= wh * (1 + 1e-12)

    def test_noiseless_dense_pilots_consistent(self):
        for seed in range(20):
            # too few starts can stop in the "all white noise" basin
            p = synthetic_problem(4000, 0, (1e-3, 0.999, 0.0), 100 + seed, starts=6)
            th = estimate_parameters(p, seed=seed).theta_hat
            assert abs(th.phi - 0.999) <= 3e-3, (seed, th.phi)

    def test_collapsed_bounds(self):
        pt = (0.02, 0.99, 0.1)
        p = synthetic_problem(100, 4, (0.03, 0.98, 0.2), 10,
                              bounds=((pt[0], pt[0]), (pt[1], pt[1]), (pt[2], pt[2])))
        res = estimate_parameters(p, seed=0)
        th = res.theta_hat
        assert (th.sigma_eps, th.phi, th.sigma_w) == pytest.approx(pt, rel=1e-12)
        assert res.neg_loglik == pytest.approx(neg_loglik_fast(p, pt), rel=1e-12)

    def test_zero_noise_bound(self):
        p = synthetic_problem(200, 4, (0.02, 0.99, 0.0), 11, starts=2,
                              bounds=((1e-3, 0.1), (0.9, 0.9999), (0.0, 0.0)))
        assert estimate_parameters(p, seed=0).theta_hat.sigma_w == 0.0

    def test_gradient_vanishes_at_optimum(self):
        p = synthetic_problem(800, 9, (0.02, 0.995, 0.3), 12, starts=8)
        res = estimate_parameters(p, seed=0, xatol=1e-9, fatol=1e-11, maxiter=4000)
        th = res.theta_hat
        g_opt = np.linalg.norm(_z_gradient(p, (th.sigma_eps, th.phi, th.sigma_w)))
        rng = np.random.default_rng(13)
        g_rand = [np.linalg.norm(_z_gradient(p, random_theta(rng))) for _ in range(10)]
        assert g_opt < 1e-3 * np.median(g_rand)

    def test_deterministic_given_seed(self):
        p = synthetic_problem(300, 9, (0.02, 0.995, 0.3), 14, starts=3)
        a = estimate_parameters(p, seed=5)
        b = estimate_parameters(p, seed=5)
        assert a.theta_hat == b.theta_hat and a.neg_loglik == b.neg_loglik

    def test_degenerate(self):
        p = synthetic_problem(50, 4, (0.02, 0.99, 0.1), 15, starts=2)
        p.m_tilde = np.full(p.M, np.inf)
        with np.errstate(invalid="ignore"):
            with pytest.raises(LikelihoodDegenerateError):
                estimate_parameters(p, seed=0)
