"""Observed data container and mean prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonAdmissibleMeanError
from .links import Link, resolve_link


@dataclass(frozen=True)
class Design:
    """An observed response vector paired with its covariate matrix.

    y is a length-N vector of strictly positive signal values; X is the
    N x k covariate matrix whose n-th row multiplies the coefficients in
    the linear predictor.  Requires N > k >= 1.  Full column rank of X is
    not checked here; fitting routines check it where it matters.
    """

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2:
            raise ValueError("y must be a vector and X a matrix")
        n, k = X.shape
        if y.shape[0] != n:
            raise ValueError(f"y has {y.shape[0]} rows but X has {n}")
        if k < 1 or n <= k:
            raise ValueError(f"need N > k >= 1, got N={n}, k={k}")
        if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
            raise DomainError("all responses must be positive and finite")
        if not np.all(np.isfinite(X)):
            raise DomainError("covariates must be finite")
        y = y.copy()
        X = X.copy()
        y.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def n_params(self) -> int:
        return self.X.shape[1]


def check_means(mu, link_name: str = "") -> np.ndarray:
    """Validate that every fitted mean is strictly positive and finite."""
    mu = np.asarray(mu, dtype=float)
    if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
        where = "" if not link_name else f" under the {link_name} link"
        raise NonAdmissibleMeanError(
            f"linear predictor maps to non-admissible mean(s){where}"
        )
    return mu


def predict(design: Design, beta, link: Link | str | None = None) -> np.ndarray:
    """Fitted means mu[n] = g^{-1}(x[n]' beta) for every observation."""
    link = resolve_link(link)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (design.n_params,):
        raise ValueError(
            f"beta must have length {design.n_params}, got shape {beta.shape}"
        )
    eta = design.X @ beta
    return check_means(link.inverse(eta), link.name)
