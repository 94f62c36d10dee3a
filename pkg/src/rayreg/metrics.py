"""Figures of merit for estimator studies and fitted models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedRelativeBiasError


@dataclass(frozen=True)
class EstimatorSample:
    """Monte Carlo estimates (one row per replication) with the truth."""

    estimates: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        est = np.atleast_2d(np.asarray(self.estimates, dtype=float))
        truth = np.atleast_1d(np.asarray(self.truth, dtype=float))
        if est.ndim != 2 or truth.ndim != 1 or est.shape[1] != truth.shape[0]:
            raise ValueError("estimates must be M x k with a length-k truth")
        if est.shape[0] < 1:
            raise ValueError("need at least one replication")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "truth", truth)


def relative_bias_pct(sample: EstimatorSample) -> np.ndarray:
    """Percentage relative bias 100 (mean(estimate) - truth) / truth."""
    if np.any(sample.truth == 0.0):
        raise UndefinedRelativeBiasError(
            "relative bias is undefined for a zero true parameter"
        )
    return 100.0 * (sample.estimates.mean(axis=0) - sample.truth) / sample.truth


def rmse_param(sample: EstimatorSample) -> np.ndarray:
    """Per-parameter root mean squared error around the truth."""
    err = sample.estimates - sample.truth
    return np.sqrt(np.mean(err * err, axis=0))


def irbsn(rb) -> float:
    """Root mean square of the per-parameter relative biases."""
    rb = np.atleast_1d(np.asarray(rb, dtype=float))
    if rb.size < 1:
        raise ValueError("need at least one relative-bias component")
    return float(np.sqrt(np.mean(rb * rb)))


def fitted_rmse(y, mu_hat) -> float:
    """Root mean square discrepancy between observations and fitted means."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mu_hat = np.atleast_1d(np.asarray(mu_hat, dtype=float))
    if y.shape != mu_hat.shape:
        raise ValueError(f"length mismatch: y has {y.shape}, mu_hat has {mu_hat.shape}")
    err = y - mu_hat
    return float(np.sqrt(np.mean(err * err)))
