import numpy as np
import pytest

from rayreg import Design, sample
from rayreg.links import resolve_link


def random_design(rng, n_lo=5, n_hi=50, k_hi=4, link="log", beta_scale=0.4):
    """One random (design, beta) pair with responses drawn from the model."""
    k = int(rng.integers(1, k_hi + 1))
    n = int(rng.integers(max(k + 1, n_lo), n_hi + 1))
    cols = [np.ones(n)]
    cols += [rng.normal(size=n) for _ in range(k - 1)]
    X = np.column_stack(cols)
    beta = rng.normal(scale=beta_scale, size=k)
    lk = resolve_link(link)
    if lk.name == "identity":
        beta = np.abs(beta) + 0.5
        X[:, 1:] = np.abs(X[:, 1:])
    mu = lk.inverse(X @ beta)
    y = sample(mu, rng)
    return Design(y=y, X=X), beta


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
