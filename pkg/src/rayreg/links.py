"""Link functions mapping the positive mean to an unconstrained linear predictor.

Every link is strictly monotonic and twice differentiable on mu > 0.  All
methods are vectorized and shape-preserving, so they can be applied to a
single mean, a length-N vector, or a batch of predictor matrices alike.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np


class Link(ABC):
    """Abstract link g with the derivative bundle the scoring equations need."""

    name: str

    @abstractmethod
    def g(self, mu):
        """Link value eta = g(mu)."""

    @abstractmethod
    def g_prime(self, mu):
        """First derivative g'(mu)."""

    @abstractmethod
    def g_second(self, mu):
        """Second derivative g''(mu)."""

    @abstractmethod
    def inverse(self, eta):
        """Inverse link mu = g^{-1}(eta).  May produce non-admissible values;
        callers that require mu > 0 must validate (see design.predict)."""

    def dmu_deta(self, mu):
        """d(mu)/d(eta) = 1 / g'(mu), evaluated at mu."""
        return 1.0 / self.g_prime(mu)

    def dmu_deta_dmu(self, mu):
        """d/d(mu) of dmu/deta, i.e. -g''(mu) / g'(mu)^2."""
        gp = self.g_prime(mu)
        return -self.g_second(mu) / (gp * gp)

    def __repr__(self):
        return f"{type(self).__name__}()"


class LogLink(Link):
    """g(mu) = log(mu); the default and the one used in every study here."""

    name = "log"

    def g(self, mu):
        return np.log(mu)

    def g_prime(self, mu):
        return 1.0 / np.asarray(mu, dtype=float)

    def g_second(self, mu):
        mu = np.asarray(mu, dtype=float)
        return -1.0 / (mu * mu)

    def inverse(self, eta):
        return np.exp(eta)

    # Exact simplifications: dmu/deta = mu and its mu-derivative is 1.
    def dmu_deta(self, mu):
        return np.asarray(mu, dtype=float)

    def dmu_deta_dmu(self, mu):
        return np.ones_like(np.asarray(mu, dtype=float))


class IdentityLink(Link):
    """g(mu) = mu; admissible only where the linear predictor stays positive."""

    name = "identity"

    def g(self, mu):
        return np.asarray(mu, dtype=float)

    def g_prime(self, mu):
        return np.ones_like(np.asarray(mu, dtype=float))

    def g_second(self, mu):
        return np.zeros_like(np.asarray(mu, dtype=float))

    def inverse(self, eta):
        return np.asarray(eta, dtype=float)

    def dmu_deta(self, mu):
        return np.ones_like(np.asarray(mu, dtype=float))

    def dmu_deta_dmu(self, mu):
        return np.zeros_like(np.asarray(mu, dtype=float))


LOG = LogLink()
IDENTITY = IdentityLink()

_BY_NAME = {"log": LOG, "identity": IDENTITY}


def resolve_link(link: str | Link | None) -> Link:
    """Return a Link instance from a name, an instance, or None (-> log)."""
    if link is None:
        return LOG
    if isinstance(link, Link):
        return link
    try:
        return _BY_NAME[link]
    except KeyError:
        raise ValueError(
            f"unknown link {link!r}; expected one of {sorted(_BY_NAME)}"
        ) from None
