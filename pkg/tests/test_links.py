import numpy as np
import pytest

from rayreg import Design, IdentityLink, LogLink, NonAdmissibleMeanError, predict
from rayreg.links import resolve_link


@pytest.mark.parametrize("link", [LogLink(), IdentityLink()])
class TestDerivativeContracts:
    mus = np.array([0.2, 0.7, 1.0, 3.5, 12.0])

    def test_inverse_roundtrip(self, link):
        np.testing.assert_allclose(link.inverse(link.g(self.mus)), self.mus, rtol=1e-12)

    def test_g_prime_finite_difference(self, link):
        h = 1e-6 * (1.0 + self.mus)
        fd = (link.g(self.mus + h) - link.g(self.mus - h)) / (2 * h)
        np.testing.assert_allclose(link.g_prime(self.mus), fd, rtol=1e-7)

    def test_g_second_finite_difference(self, link):
        h = 1e-4 * (1.0 + self.mus)
        fd = (link.g(self.mus + h) - 2 * link.g(self.mus) + link.g(self.mus - h)) / h**2
        np.testing.assert_allclose(link.g_second(self.mus), fd, rtol=1e-5, atol=1e-12)

    def test_dmu_deta_is_inverse_gprime(self, link):
        np.testing.assert_allclose(
            link.dmu_deta(self.mus), 1.0 / link.g_prime(self.mus), rtol=1e-12
        )

    def test_dmu_deta_dmu_matches_formula(self, link):
        gp = link.g_prime(self.mus)
        expected = -link.g_second(self.mus) / (gp * gp)
        np.testing.assert_allclose(link.dmu_deta_dmu(self.mus), expected, rtol=1e-12)


def test_log_link_exact_simplifications():
    link = LogLink()
    mus = np.array([0.1, 1.0, 9.0])
    assert np.all(link.dmu_deta(mus) == mus)
    assert np.all(link.dmu_deta_dmu(mus) == 1.0)


def test_resolve_link():
    assert resolve_link(None).name == "log"
    assert resolve_link("log").name == "log"
    assert resolve_link("identity").name == "identity"
    lk = LogLink()
    assert resolve_link(lk) is lk
    with pytest.raises(ValueError, match="unknown link"):
        resolve_link("logit")


class TestPredict:
    def test_zero_beta_gives_unit_means(self):
        d = Design(y=[1.0, 2.0, 3.0], X=np.column_stack([np.ones(3), [0.1, 0.2, 0.3]]))
        np.testing.assert_array_equal(predict(d, [0.0, 0.0], "log"), np.ones(3))

    def test_intercept_only_exponentiates(self):
        d = Design(y=[1.0, 2.0], X=np.ones((2, 1)))
        np.testing.assert_allclose(predict(d, [1.3], "log"), np.exp(1.3))

    def test_duplicated_rows_get_equal_means(self, rng):
        x = rng.random(2)
        X = np.vstack([x, x, rng.random(2)])
        d = Design(y=[1.0, 1.0, 1.0], X=X)
        mu = predict(d, [0.4, -0.2], "log")
        assert mu[0] == mu[1]

    def test_exp_linearity_in_intercept(self, rng):
        d = Design(y=np.ones(6), X=np.column_stack([np.ones(6), rng.normal(size=6)]))
        beta = np.array([0.3, 0.8])
        shifted = beta + np.array([0.9, 0.0])
        np.testing.assert_allclose(
            predict(d, shifted, "log"), np.exp(0.9) * predict(d, beta, "log"), rtol=1e-12
        )

    def test_identity_rejects_nonpositive_means(self):
        d = Design(y=[1.0, 1.0], X=np.column_stack([np.ones(2), [0.0, 1.0]]))
        with pytest.raises(NonAdmissibleMeanError):
            predict(d, [1.0, -2.0], "identity")

    def test_wrong_beta_length(self):
        d = Design(y=[1.0, 2.0], X=np.ones((2, 1)))
        with pytest.raises(ValueError, match="length"):
            predict(d, [1.0, 2.0], "log")
