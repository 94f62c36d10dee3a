import numpy as np
import pytest
from scipy import integrate, stats

from rayreg import (
    DomainError,
    RayleighMean,
    cdf,
    logpdf,
    moments,
    pdf,
    quantile,
    sample,
)

VAR_FACTOR = 4.0 / np.pi - 1.0


class TestPdf:
    def test_value_at_unit(self):
        assert pdf(1.0, 1.0) == pytest.approx((np.pi / 2) * np.exp(-np.pi / 4), rel=1e-12)

    def test_scale_family(self, rng):
        for _ in range(50):
            y = float(rng.uniform(0.05, 5.0))
            mu = float(rng.uniform(0.1, 4.0))
            c = float(rng.uniform(0.2, 6.0))
            assert pdf(c * y, c * mu) * c == pytest.approx(pdf(y, mu), rel=1e-12)

    @pytest.mark.parametrize("mu", [0.5, 1.0, 3.0])
    def test_integrates_to_one(self, mu):
        total, err = integrate.quad(lambda y: pdf(y, mu), 0.0, np.inf)
        assert err < 1e-8
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("y,mu", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_domain_errors(self, y, mu):
        with pytest.raises(DomainError):
            pdf(y, mu)

    def test_logpdf_matches_log_of_pdf(self, rng):
        y = rng.uniform(0.05, 5.0, size=200)
        mu = rng.uniform(0.1, 4.0, size=200)
        np.testing.assert_allclose(logpdf(y, mu), np.log(pdf(y, mu)), rtol=1e-12)


class TestMoments:
    def test_unit_mean(self):
        mean, var = moments(1.0)
        assert mean == 1.0
        assert var == pytest.approx(VAR_FACTOR, rel=1e-14)

    def test_variance_scales_quadratically(self):
        _, var = moments(2.0)
        assert var == pytest.approx(4.0 * VAR_FACTOR, rel=1e-14)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            moments(0.0)

    def test_monte_carlo_mean(self):
        n = 1_000_000
        draws = sample(1.5, np.random.default_rng(7), size=n)
        se = 1.5 * np.sqrt(VAR_FACTOR) / np.sqrt(n)
        assert abs(draws.mean() - 1.5) < 3 * se


class _StubRng:
    """Deterministic uniform source for boundary tests."""

    def __init__(self, values):
        self.values = list(values)

    def random(self, size=None):
        v = self.values.pop(0)
        if size is None:
            return v
        return np.full(size, v, dtype=float)


class TestSample:
    def test_mean_quantile_maps_to_mu(self):
        u = 1.0 - np.exp(-np.pi / 4.0)
        got = sample(2.5, _StubRng([u]))
        assert got == pytest.approx(2.5, rel=1e-12)

    def test_zero_uniform_is_redrawn(self):
        got = sample(1.0, _StubRng([0.0, 0.5]))
        assert got > 0.0
        arr = sample(np.array([1.0, 2.0]), _StubRng([0.0, 0.5]))
        assert np.all(arr > 0.0)

    def test_draws_positive_and_finite(self, rng):
        draws = sample(0.3, rng, size=10_000)
        assert np.all(draws > 0.0)
        assert np.all(np.isfinite(draws))

    def test_array_mu_shapes(self, rng):
        mu = np.array([[0.5, 1.0], [2.0, 3.0]])
        draws = sample(mu, rng)
        assert draws.shape == mu.shape

    def test_ks_statistic(self):
        draws = sample(1.0, np.random.default_rng(11), size=20_000)
        stat = stats.kstest(draws, lambda v: cdf(v, 1.0)).statistic
        assert stat < 1.6276 / np.sqrt(20_000)

    def test_empirical_moments_within_4se(self):
        n = 100_000
        mu = 2.0
        draws = sample(mu, np.random.default_rng(3), size=n)
        var_true = mu * mu * VAR_FACTOR
        se_mean = np.sqrt(var_true / n)
        assert abs(draws.mean() - mu) < 4 * se_mean
        s2 = draws.var()
        m4 = np.mean((draws - draws.mean()) ** 4)
        se_var = np.sqrt(max(m4 - s2 * s2, 0.0) / n)
        assert abs(s2 - var_true) < 4 * se_var


class TestCdfQuantile:
    def test_roundtrip(self):
        for mu in (0.5, 1.0, 3.0):
            y = np.linspace(mu / 10, 10 * mu, 200)
            back = quantile(cdf(y, mu), mu)
            np.testing.assert_allclose(back, y, rtol=1e-10)

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            quantile(1.0, 1.0)
        with pytest.raises(DomainError):
            quantile(-0.1, 1.0)


def test_rayleigh_mean_validation():
    assert RayleighMean(2.0).mu == 2.0
    with pytest.raises(DomainError):
        RayleighMean(0.0)
    with pytest.raises(DomainError):
        RayleighMean(float("nan"))
