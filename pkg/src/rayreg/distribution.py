"""Mean-parameterized Rayleigh distribution.

The distribution is parameterized directly by its mean mu > 0:

    f(y; mu) = (pi * y / (2 * mu^2)) * exp(-pi * y^2 / (4 * mu^2)),  y > 0,

with E(Y) = mu and Var(Y) = mu^2 * (4/pi - 1).  All functions broadcast over
numpy arrays; scalar inputs give scalar outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_VAR_FACTOR = 4.0 / np.pi - 1.0


@dataclass(frozen=True)
class RayleighMean:
    """A fitted (or assumed) mean parameter of the distribution."""

    mu: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise DomainError(f"mu must be a positive finite real, got {self.mu}")


def _validate_positive(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0)):
        raise DomainError(f"{name} must be positive and finite")
    return arr


def _maybe_scalar(out, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def pdf(y, mu):
    """Density of the mean-parameterized Rayleigh at y."""
    y = _validate_positive(y, "y")
    mu = _validate_positive(mu, "mu")
    z = y / mu
    out = (np.pi * z / (2.0 * mu)) * np.exp(-np.pi * z * z / 4.0)
    return _maybe_scalar(out, y, mu)


def logpdf(y, mu):
    """Log-density; numerically preferable to log(pdf(y, mu))."""
    y = _validate_positive(y, "y")
    mu = _validate_positive(mu, "mu")
    z = y / mu
    out = np.log(np.pi / 2.0) + np.log(y) - 2.0 * np.log(mu) - np.pi * z * z / 4.0
    return _maybe_scalar(out, y, mu)


def cdf(y, mu):
    """P(Y <= y) = 1 - exp(-pi y^2 / (4 mu^2))."""
    y = _validate_positive(y, "y")
    mu = _validate_positive(mu, "mu")
    z = y / mu
    out = -np.expm1(-np.pi * z * z / 4.0)
    return _maybe_scalar(out, y, mu)


def quantile(p, mu):
    """Inverse CDF: the y with cdf(y, mu) = p, for p in [0, 1)."""
    p = np.asarray(p, dtype=float)
    mu = _validate_positive(mu, "mu")
    if np.any(p < 0.0) or np.any(p >= 1.0):
        raise DomainError("p must lie in [0, 1)")
    out = mu * np.sqrt(-(4.0 / np.pi) * np.log1p(-p))
    return _maybe_scalar(out, p, mu)


def moments(mu):
    """Mean and variance of the distribution with mean mu."""
    mu = _validate_positive(mu, "mu")
    mean = mu
    var = mu * mu * _VAR_FACTOR
    return _maybe_scalar(mean, mu), _maybe_scalar(var, mu)


def sample(mu, rng: np.random.Generator, size=None):
    """Draw i.i.d. variates with mean mu by inverse-CDF transform.

    mu may be a scalar (returns `size` draws, or one scalar when size is
    None) or an array (returns one draw per entry; `size` must then be None
    or equal mu.shape).  Uniforms are drawn on the open interval (0, 1) --
    an exact 0 is redrawn -- so every returned value is strictly positive
    and finite.
    """
    mu = _validate_positive(mu, "mu")
    if mu.ndim > 0:
        if size is not None and tuple(np.atleast_1d(size)) != mu.shape:
            raise ValueError("size must be None or match mu.shape for array mu")
        shape = mu.shape
    else:
        shape = size
    u = rng.random(shape)
    # rng.random() lies in [0, 1); only the 0 boundary needs rejection.
    if np.ndim(u) == 0:
        while u == 0.0:
            u = rng.random()
    else:
        bad = u == 0.0
        while np.any(bad):
            u[bad] = rng.random(int(bad.sum()))
            bad = u == 0.0
    out = mu * np.sqrt(-(4.0 / np.pi) * np.log1p(-u))
    if np.ndim(mu) == 0 and size is None:
        return float(out)
    return out
