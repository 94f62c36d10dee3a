import math

import numpy as np
import pytest

from rayreg import (
    Design,
    SingularInformationError,
    bias_via_cumulants,
    bias_weights,
    cox_snell_bias,
    fisher_info,
    logpdf,
    loglik,
    predict,
    sample,
    score,
    score_info,
)
from .conftest import random_design


def finite_diff_gradient(design, beta, link):
    grad = np.empty(beta.size)
    for i in range(beta.size):
        h = 1e-6 * (1.0 + abs(beta[i]))
        up, dn = beta.copy(), beta.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (loglik(design, up, link) - loglik(design, dn, link)) / (2 * h)
    return grad


class TestLoglik:
    def test_single_observation_term(self):
        # one unit observation at unit mean contributes log(pi/2) - pi/4
        assert logpdf(1.0, 1.0) == pytest.approx(math.log(math.pi / 2) - math.pi / 4,
                                                 rel=1e-12)
        d = Design(y=[1.0, 1.0], X=np.ones((2, 1)))
        assert loglik(d, [0.0], "log") == pytest.approx(
            2 * (math.log(math.pi / 2) - math.pi / 4), rel=1e-12
        )

    def test_duplicating_observations_doubles(self, rng):
        d, beta = random_design(rng)
        doubled = Design(y=np.concatenate([d.y, d.y]), X=np.vstack([d.X, d.X]))
        assert loglik(doubled, beta, "log") == pytest.approx(
            2 * loglik(d, beta, "log"), rel=1e-12
        )

    def test_matches_sum_of_logpdf(self, rng):
        for _ in range(25):
            d, beta = random_design(rng)
            mu = predict(d, beta, "log")
            oracle = math.fsum(logpdf(float(yi), float(mi)) for yi, mi in zip(d.y, mu))
            assert loglik(d, beta, "log") == pytest.approx(oracle, rel=1e-10)

    def test_permutation_invariance(self, rng):
        d, beta = random_design(rng)
        perm = rng.permutation(d.n_obs)
        dp = Design(y=d.y[perm], X=d.X[perm])
        assert loglik(dp, beta, "log") == pytest.approx(loglik(d, beta, "log"), rel=1e-12)


class TestScore:
    @pytest.mark.parametrize("link", ["log", "identity"])
    def test_finite_difference(self, link, rng):
        for _ in range(20):
            d, beta = random_design(rng, link=link)
            analytic = score(d, beta, link)
            fd = finite_diff_gradient(d, beta, link)
            np.testing.assert_allclose(analytic, fd, rtol=1e-6, atol=1e-8)

    def test_zero_at_closed_form_intercept_mle(self, rng):
        y = sample(np.full(20, 1.7), rng)
        d = Design(y=y, X=np.ones((20, 1)))
        mu_hat = math.sqrt(math.pi * np.sum(y * y) / (4 * 20))
        u = score(d, [math.log(mu_hat)], "log")
        assert abs(u[0]) < 1e-10

    def test_negative_when_means_dominate_data(self, rng):
        d, _ = random_design(rng)
        beta_far = np.zeros(d.n_params)
        beta_far[0] = 12.0  # means around e^12, far above any draw
        u = score(d, beta_far, "log")
        assert u[0] < 0.0

    def test_permutation_invariance(self, rng):
        d, beta = random_design(rng)
        perm = rng.permutation(d.n_obs)
        dp = Design(y=d.y[perm], X=d.X[perm])
        np.testing.assert_allclose(score(dp, beta), score(d, beta), rtol=1e-12)


class TestFisherInfo:
    def test_log_link_identity(self, rng):
        for _ in range(20):
            d, beta = random_design(rng)
            info = fisher_info(d, beta, "log")
            np.testing.assert_allclose(info, 4.0 * (d.X.T @ d.X), rtol=1e-12)

    def test_single_parameter_unit_covariate(self):
        d = Design(y=[1.0, 1.0], X=np.ones((2, 1)))
        assert fisher_info(d, [0.3], "log")[0, 0] == pytest.approx(8.0, rel=1e-12)

    def test_symmetry_and_positive_definiteness(self, rng):
        for link in ("log", "identity"):
            d, beta = random_design(rng, link=link)
            info = fisher_info(d, beta, link)
            np.testing.assert_allclose(info, info.T, rtol=1e-12)
            assert np.all(np.linalg.eigvalsh(info) > 0.0)

    def test_matches_expected_numerical_hessian(self):
        # Average finite-difference Hessians of the log-likelihood over
        # simulated responses at the true coefficients; the mean of the
        # negative Hessian must match the analytic information within
        # Monte Carlo error.
        rng = np.random.default_rng(12)
        n, reps = 12, 2500
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        beta = np.array([0.4, 0.6])
        mu = np.exp(X @ beta)
        h = 1e-4

        def hessian(d):
            H = np.empty((2, 2))
            for i in range(2):
                for j in range(2):
                    bpp = beta.copy(); bpp[i] += h; bpp[j] += h
                    bpm = beta.copy(); bpm[i] += h; bpm[j] -= h
                    bmp = beta.copy(); bmp[i] -= h; bmp[j] += h
                    bmm = beta.copy(); bmm[i] -= h; bmm[j] -= h
                    H[i, j] = (
                        loglik(d, bpp) - loglik(d, bpm) - loglik(d, bmp) + loglik(d, bmm)
                    ) / (4 * h * h)
            return H

        draws = np.empty((reps, 2, 2))
        for r in range(reps):
            d = Design(y=sample(mu, rng), X=X)
            draws[r] = -hessian(d)
        mean_h = draws.mean(axis=0)
        se = draws.std(axis=0, ddof=1) / np.sqrt(reps)
        info = fisher_info(Design(y=sample(mu, rng), X=X), beta, "log")
        assert np.all(np.abs(mean_h - info) < 3 * se)


class TestBiasWeights:
    def test_log_link_weights_are_exactly_minus_four(self, rng):
        d, beta = random_design(rng)
        bw = bias_weights(d, beta, "log")
        assert np.all(bw.w == -4.0)

    def test_delta_is_quarter_hat_diagonal(self, rng):
        d, beta = random_design(rng)
        bw = bias_weights(d, beta, "log")
        q, _ = np.linalg.qr(d.X)
        hat = np.sum(q * q, axis=1)
        np.testing.assert_allclose(bw.delta, hat / 4.0, rtol=1e-10)
        assert math.fsum(bw.delta) == pytest.approx(d.n_params / 4.0, rel=1e-12)

    def test_square_design_rejected_at_construction(self):
        with pytest.raises(ValueError, match="N > k"):
            Design(y=[1.0, 2.0], X=np.eye(2))

    def test_identity_link_weights(self, rng):
        d, beta = random_design(rng, link="identity")
        mu = predict(d, beta, "identity")
        bw = bias_weights(d, beta, "identity")
        np.testing.assert_allclose(bw.w, -2.0 / mu**3, rtol=1e-12)


class TestCoxSnellBias:
    def test_intercept_only_closed_form(self, rng):
        for n in (7, 9, 25):
            y = sample(np.full(n, 2.0), rng)
            d = Design(y=y, X=np.ones((n, 1)))
            b = cox_snell_bias(d, [0.4], "log")
            assert b[0] == pytest.approx(-1.0 / (4 * n), rel=1e-13)

    def test_duplicating_design_halves_bias(self, rng):
        n = 11
        y = sample(np.full(n, 1.0), rng)
        d = Design(y=y, X=np.ones((n, 1)))
        d2 = Design(y=np.concatenate([y, y]), X=np.ones((2 * n, 1)))
        b1 = cox_snell_bias(d, [0.1], "log")
        b2 = cox_snell_bias(d2, [0.1], "log")
        assert b2[0] == pytest.approx(b1[0] / 2.0, rel=1e-12)

    @pytest.mark.parametrize("link", ["log", "identity"])
    def test_matches_cumulant_triple_sum(self, link, rng):
        for _ in range(30):
            d, beta = random_design(rng, n_lo=5, n_hi=12, k_hi=3, link=link)
            matrix_path = cox_snell_bias(d, beta, link)
            cumulant_path = bias_via_cumulants(d, beta, link)
            np.testing.assert_allclose(matrix_path, cumulant_path, atol=1e-10)

    def test_single_noninterceptcovariate_matches(self, rng):
        x = rng.uniform(0.5, 2.0, size=8)
        y = sample(np.exp(0.7 * x), rng)
        d = Design(y=y, X=x[:, None])
        np.testing.assert_allclose(
            cox_snell_bias(d, [0.7], "log"),
            bias_via_cumulants(d, [0.7], "log"),
            atol=1e-12,
        )

    def test_singular_information_raises(self):
        X = np.column_stack([np.ones(6), np.zeros(6)])
        d = Design(y=np.ones(6), X=X)
        with pytest.raises(SingularInformationError):
            cox_snell_bias(d, [0.0, 0.0], "log")


def test_score_info_bundle_consistency(rng):
    d, beta = random_design(rng)
    bundle = score_info(d, beta, "log")
    np.testing.assert_allclose(bundle.score, score(d, beta, "log"), rtol=1e-12)
    np.testing.assert_allclose(bundle.info, fisher_info(d, beta, "log"), rtol=1e-12)
    assert bundle.loglik == pytest.approx(loglik(d, beta, "log"), rel=1e-12)
