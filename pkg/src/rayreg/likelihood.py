"""Log-likelihood, score, Fisher information, and second-order bias quantities.

Two distinct diagonal weight families appear below and must not be
confused: the *Fisher weights* entering the information matrix
X' diag(wf) X, and the *bias weights* entering the second-order bias
I^{-1} X' diag(w) delta.  They are kept in separate functions and never
share storage.

The pointwise kernels are shape-agnostic over a leading batch dimension
((N,) or (B, N) arrays) so the iterative fitters can reuse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import Design, predict
from .errors import SingularInformationError
from .links import Link, resolve_link

LOG_HALF_PI = math.log(math.pi / 2.0)


@dataclass(frozen=True)
class ScoreInfo:
    """Score vector, Fisher information, and log-likelihood at one beta."""

    score: np.ndarray
    info: np.ndarray
    loglik: float


@dataclass(frozen=True)
class BiasWeights:
    """Pointwise bias weights w[n] and leverage-like delta[n]."""

    w: np.ndarray
    delta: np.ndarray


# ---------------------------------------------------------------------------
# pointwise kernels (broadcast over any leading batch shape)
# ---------------------------------------------------------------------------

def loglik_terms(y, mu):
    """Per-observation log-likelihood contributions."""
    z = y / mu
    return LOG_HALF_PI + np.log(y) - 2.0 * np.log(mu) - np.pi * z * z / 4.0


def score_residual(y, mu):
    """d l_n / d mu = pi y^2 / (2 mu^3) - 2 / mu."""
    return np.pi * y * y / (2.0 * mu ** 3) - 2.0 / mu


def fisher_weight(mu, t):
    """Fisher weight (4 / mu^2) * t^2 with t = dmu/deta.

    Written as 4 (t/mu)^2 so the log link (t = mu) gives exactly 4.0.
    """
    r = t / mu
    return 4.0 * r * r


def bias_weight(mu, t, tp):
    """Bias weight -2 (t/mu)^3 - 2 (t/mu)^2 * tp with tp = d(dmu/deta)/dmu.

    Under the log link t/mu = 1 and tp = 1, so w = -4 exactly.
    """
    r = t / mu
    return -2.0 * r ** 3 - 2.0 * r * r * tp


# ---------------------------------------------------------------------------
# public single-design operations
# ---------------------------------------------------------------------------

def loglik(design: Design, beta, link: Link | str | None = None) -> float:
    """Log-likelihood of beta for the observed design."""
    link = resolve_link(link)
    mu = predict(design, beta, link)
    return float(np.sum(loglik_terms(design.y, mu)))


def score(design: Design, beta, link: Link | str | None = None) -> np.ndarray:
    """Score vector U(beta) = X' T v."""
    link = resolve_link(link)
    mu = predict(design, beta, link)
    t = link.dmu_deta(mu)
    return design.X.T @ (t * score_residual(design.y, mu))


def fisher_info(design: Design, beta, link: Link | str | None = None) -> np.ndarray:
    """Expected information I(beta) = X' W X with Fisher weights W."""
    link = resolve_link(link)
    mu = predict(design, beta, link)
    wf = fisher_weight(mu, link.dmu_deta(mu))
    info = design.X.T @ (wf[:, None] * design.X)
    return 0.5 * (info + info.T)


def score_info(design: Design, beta, link: Link | str | None = None) -> ScoreInfo:
    """Evaluate loglik, score, and information in one pass."""
    link = resolve_link(link)
    mu = predict(design, beta, link)
    y = design.y
    t = link.dmu_deta(mu)
    u = design.X.T @ (t * score_residual(y, mu))
    wf = fisher_weight(mu, t)
    info = design.X.T @ (wf[:, None] * design.X)
    info = 0.5 * (info + info.T)
    return ScoreInfo(score=u, info=info, loglik=float(np.sum(loglik_terms(y, mu))))


def _solve_info(info: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        out = np.linalg.solve(info, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError(str(exc)) from exc
    if not np.all(np.isfinite(out)):
        raise SingularInformationError("information solve produced non-finite values")
    return out


def bias_weights(design: Design, beta, link: Link | str | None = None) -> BiasWeights:
    """Bias weights w[n] and delta[n] = x[n]' I^{-1}(beta) x[n]."""
    link = resolve_link(link)
    mu = predict(design, beta, link)
    t = link.dmu_deta(mu)
    w = bias_weight(mu, t, link.dmu_deta_dmu(mu))
    info = fisher_info(design, beta, link)
    delta = np.sum(design.X * _solve_info(info, design.X.T).T, axis=1)
    return BiasWeights(w=w, delta=delta)


def cox_snell_bias(design: Design, beta, link: Link | str | None = None) -> np.ndarray:
    """Second-order bias vector B(beta) = I^{-1} X' diag(w) delta."""
    link = resolve_link(link)
    bw = bias_weights(design, beta, link)
    info = fisher_info(design, beta, link)
    return _solve_info(info, design.X.T @ (bw.w * bw.delta))


def bias_via_cumulants(design: Design, beta, link: Link | str | None = None) -> np.ndarray:
    """Second-order bias by the explicit cumulant triple sum.

    Reference path, O(k^3 N): builds the second- and third-order cumulant
    arrays observation by observation and contracts them elementwise.  Kept
    in the library (not only in tests) so the fast matrix form in
    cox_snell_bias can always be cross-checked against it.
    """
    link = resolve_link(link)
    X = design.X
    n, k = X.shape
    mu = predict(design, beta, link)
    t = np.asarray(link.dmu_deta(mu), dtype=float)
    tp = np.asarray(link.dmu_deta_dmu(mu), dtype=float)
    r = t / mu

    # kappa_rs = E(d^2 l / d beta_r d beta_s); its inverse carries the sign
    # convention that -kappa^{ar} is an element of I^{-1}.
    kappa = np.empty((k, k))
    c_rs = -4.0 * r * r
    c_rs_u = 8.0 * r ** 3 - 8.0 * r * r * tp        # d kappa_rs / d beta_u
    c_rsu = 20.0 * r ** 3 - 12.0 * r * r * tp       # E(d^3 l / d beta_r d beta_s d beta_u)
    for a in range(k):
        for b in range(a, k):
            val = math.fsum(c_rs[i] * X[i, a] * X[i, b] for i in range(n))
            kappa[a, b] = val
            kappa[b, a] = val
    try:
        kappa_inv = np.linalg.inv(kappa)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError(str(exc)) from exc
    if not np.all(np.isfinite(kappa_inv)):
        raise SingularInformationError("cumulant matrix inverse is non-finite")

    bias = np.empty(k)
    coef = c_rs_u - 0.5 * c_rsu
    for a in range(k):
        total = []
        for rr in range(k):
            for ss in range(k):
                for uu in range(k):
                    bracket = math.fsum(
                        coef[i] * X[i, rr] * X[i, ss] * X[i, uu] for i in range(n)
                    )
                    total.append(kappa_inv[a, rr] * kappa_inv[ss, uu] * bracket)
        bias[a] = math.fsum(total)
    return bias
