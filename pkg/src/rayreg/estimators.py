"""Maximum-likelihood fitting and the three bias-adjusted estimators.

The scoring iteration is implemented once, over a batch of response
vectors sharing one covariate matrix.  Single fits run it with a batch of
one; the parametric bootstrap and the Monte Carlo harness run it with
thousands of rows at a time, which is what makes resampling studies
tractable in pure numpy.

Under the log link the Fisher information X' W X reduces to 4 X'X for
every beta (the Fisher weights are exactly 4), so the Newton step matrix
is constant; the engine exploits that.  The identity link keeps the
general per-iterate information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import likelihood
from .design import Design, predict
from .distribution import RayleighMean, sample
from .errors import (
    BootstrapDegenerateError,
    DomainError,
    NonAdmissibleMeanError,
    RankError,
    SingularInformationError,
)
from .likelihood import LOG_HALF_PI, bias_weight, fisher_weight, score_residual
from .links import Link, LogLink, resolve_link


@dataclass(frozen=True)
class FitOptions:
    """Controls for the scoring iteration.

    Convergence is declared on the infinity norm of the (possibly
    modified) score, never on parameter change, so a converged result
    certifies the estimating equation directly.
    """

    max_iter: int = 200
    score_tol: float = 1e-8
    step_halving_max: int = 30
    init: Any = "auto"  # "auto" or an explicit length-k start vector

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.score_tol > 0.0:
            raise ValueError("score_tol must be positive")
        if self.step_halving_max < 1:
            raise ValueError("step_halving_max must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """Converged (or flagged) maximum-likelihood estimate bundle."""

    beta_hat: np.ndarray
    mu_hat: np.ndarray
    loglik: float
    info: np.ndarray
    std_err: np.ndarray
    iterations: int
    converged: bool
    final_score_norm: float


@dataclass(frozen=True)
class CorrectionResult:
    """A bias-adjusted estimate together with the bias that was removed."""

    method: str
    beta_corrected: np.ndarray
    bias_estimate: np.ndarray
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# batched scoring engine
# ---------------------------------------------------------------------------

def _check_rank(X: np.ndarray) -> None:
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankError(
            f"covariate matrix ({X.shape[0]} x {X.shape[1]}) is rank deficient"
        )


def _hat_diagonal(X: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(X)
    return np.einsum("ni,ni->n", q, q)


class _Engine:
    """Per-(X, link) precomputation plus the batched scoring kernels.

    The log link short-circuits most of the algebra: the information is
    the constant 4 X'X (Fisher weights are exactly 4), eta is log(mu), and
    the Firth modification is the constant score shift +X'h (bias weights
    are exactly -4 and delta is a quarter of the hat diagonal).
    """

    def __init__(self, X: np.ndarray, link: Link, firth: bool, newton: bool = False):
        self.X = X
        self.link = link
        self.firth = firth
        self.is_log = isinstance(link, LogLink)
        # Observed-information steps are only taken under the log link,
        # where the (possibly Firth-shifted) objective is strictly concave
        # and the negative Hessian X' diag(pi (y/mu)^2) X is always
        # positive definite, so the quadratically convergent iteration is
        # safe and finds the same unique root as Fisher scoring.
        self.newton = newton and self.is_log
        if self.is_log:
            info = 4.0 * (X.T @ X)
            try:
                self.info_const = 0.5 * (info + info.T)
                self.info_inv_const = np.linalg.inv(self.info_const)
            except np.linalg.LinAlgError as exc:
                raise SingularInformationError(str(exc)) from exc
            self.firth_shift = -(X.T @ _hat_diagonal(X)) if firth else None

    def ll_base(self, y: np.ndarray) -> np.ndarray:
        """Per-row log-likelihood terms that do not depend on beta."""
        return y.shape[-1] * LOG_HALF_PI + np.sum(np.log(y), axis=-1)

    @property
    def xxt(self) -> np.ndarray:
        """Flattened per-observation outer products, for weighted X'DX as a GEMM."""
        if not hasattr(self, "_xxt"):
            k = self.X.shape[1]
            self._xxt = (self.X[:, :, None] * self.X[:, None, :]).reshape(-1, k * k)
        return self._xxt

    def mu_of(self, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Means and linear predictors for a (m, k) coefficient batch; the
        third return flags rows whose means are all admissible."""
        eta = beta @ self.X.T
        with np.errstate(over="ignore", under="ignore"):
            mu = np.exp(eta) if self.is_log else eta
        ok = np.all(np.isfinite(mu) & (mu > 0.0), axis=-1)
        return mu, eta, ok

    def loglik_from_z(self, z, mu, eta, ll_base) -> np.ndarray:
        quad = np.sum(z * z, axis=-1)
        log_mu_sum = np.sum(eta, axis=-1) if self.is_log else np.sum(np.log(mu), axis=-1)
        return ll_base - 2.0 * log_mu_sum - (np.pi / 4.0) * quad

    def loglik_rows(self, y, mu, eta, ll_base) -> np.ndarray:
        return self.loglik_from_z(y / mu, mu, eta, ll_base)

    def score_from_z(self, z, y, mu) -> np.ndarray:
        """Score (or Firth-modified score) for each batch row, z = y/mu."""
        if self.is_log:
            u = ((np.pi / 2.0) * z * z - 2.0) @ self.X
            if self.firth:
                u = u - self.firth_shift
            return u
        t = self.link.dmu_deta(mu)
        u = (t * score_residual(y, mu)) @ self.X
        if not self.firth:
            return u
        info = self.info_rows(mu)
        info_inv, ok = _batch_inv(info)
        if not np.all(ok):
            u[~ok] = np.nan
        delta = np.einsum("ni,mij,nj->mn", self.X, info_inv, self.X)
        wb = bias_weight(mu, t, self.link.dmu_deta_dmu(mu))
        bias = np.einsum("mij,nj,mn->mi", info_inv, self.X, wb * delta)
        return u - np.einsum("mij,mj->mi", info, bias)

    def score_rows(self, y: np.ndarray, mu: np.ndarray) -> np.ndarray:
        return self.score_from_z(y / mu, y, mu)

    def info_rows(self, mu: np.ndarray) -> np.ndarray:
        k = self.X.shape[1]
        wf = fisher_weight(mu, self.link.dmu_deta(mu))
        return (wf @ self.xxt).reshape(-1, k, k)

    def step_from_z(self, z, mu, u) -> tuple[np.ndarray, np.ndarray]:
        """Ascent direction per row; second return flags solvable rows."""
        if self.newton:
            k = self.X.shape[1]
            neg_hess = ((np.pi * z * z) @ self.xxt).reshape(-1, k, k)
            return _batch_solve(neg_hess, u)
        if self.is_log:
            step = u @ self.info_inv_const.T
            return step, np.all(np.isfinite(step), axis=1)
        return _batch_solve(self.info_rows(mu), u)


def _batch_solve(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        x = np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        x = np.full_like(b, np.nan)
        for i in range(A.shape[0]):
            try:
                x[i] = np.linalg.solve(A[i], b[i])
            except np.linalg.LinAlgError:
                pass
    return x, np.all(np.isfinite(x), axis=-1)


def _batch_inv(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        inv = np.full_like(A, np.nan)
        for i in range(A.shape[0]):
            try:
                inv[i] = np.linalg.inv(A[i])
            except np.linalg.LinAlgError:
                pass
    return inv, np.all(np.isfinite(inv), axis=(-2, -1))


def _auto_init(y: np.ndarray, X: np.ndarray, link: Link) -> np.ndarray:
    """Least-squares warm start: regress g(y) on X (log link), or y on X
    with infeasible fitted means nudged positive (identity link)."""
    if isinstance(link, LogLink):
        target = np.log(y)
        return np.linalg.lstsq(X, target.T, rcond=None)[0].T
    beta = np.linalg.lstsq(X, y.T, rcond=None)[0].T
    fitted = beta @ X.T
    bad = np.any(fitted <= 0.0, axis=1)
    if np.any(bad):
        floor = 0.1 * np.min(y[bad], axis=1, keepdims=True)
        nudged = np.maximum(fitted[bad], floor)
        beta[bad] = np.linalg.lstsq(X, nudged.T, rcond=None)[0].T
    return beta


def _resolve_init(y: np.ndarray, X: np.ndarray, link: Link, opts: FitOptions) -> np.ndarray:
    if isinstance(opts.init, str):
        if opts.init != "auto":
            raise ValueError(f"unknown init {opts.init!r}; use 'auto' or a vector")
        return _auto_init(y, X, link)
    beta0 = np.asarray(opts.init, dtype=float)
    if beta0.shape != (X.shape[1],):
        raise ValueError(f"explicit init must have length {X.shape[1]}")
    return np.broadcast_to(beta0, (y.shape[0], X.shape[1])).copy()


@dataclass
class _BatchFit:
    beta: np.ndarray
    mu: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    final_score_norm: np.ndarray


def _scoring(
    y: np.ndarray,
    X: np.ndarray,
    link: Link,
    opts: FitOptions,
    *,
    firth: bool = False,
    beta0: np.ndarray | None = None,
    newton: bool = False,
) -> _BatchFit:
    """Damped ascent on the (possibly modified) score over a batch of rows.

    The default direction is the Fisher-scoring step I(beta)^{-1} U; with
    newton=True (log link only) it is the observed-information Newton
    step, which solves the identical estimating equation far faster for
    resampling loops.  MLE rows accept a step once the log-likelihood
    does not decrease; Firth rows accept once the modified-score norm
    does not increase (the Firth root is not a likelihood maximum, so the
    likelihood is the wrong merit function there).  Rows stop when the
    relevant score norm drops to opts.score_tol, when halving is
    exhausted, or at max_iter; only the first counts as convergence.
    """
    engine = _Engine(X, link, firth, newton=newton)
    if beta0 is None:
        beta0 = _resolve_init(y, X, link, opts)
    beta = np.array(beta0, dtype=float)
    m = beta.shape[0]

    mu, eta, ok = engine.mu_of(beta)
    if not np.all(ok):
        raise NonAdmissibleMeanError(
            "starting coefficients give non-admissible means; pass explicit init"
        )
    ll_base = engine.ll_base(y)

    converged = np.zeros(m, dtype=bool)
    alive = np.ones(m, dtype=bool)
    iterations = np.zeros(m, dtype=int)
    final_norm = np.full(m, np.inf)
    # Cached per-row log-likelihood (line-search reference); not needed
    # for Firth, whose merit function is the modified-score norm.
    ll = None
    if not firth:
        ll = engine.loglik_rows(y, mu, eta, ll_base)

    for sweep in range(opts.max_iter + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        full = idx.size == m
        yi = y if full else y[idx]
        mui = mu if full else mu[idx]
        zi = yi / mui
        u = engine.score_from_z(zi, yi, mui)
        norm = np.max(np.abs(u), axis=1)
        norm = np.where(np.isfinite(norm), norm, np.inf)
        final_norm[idx] = norm
        hit = norm <= opts.score_tol
        converged[idx[hit]] = True
        alive[idx[hit]] = False
        if sweep == opts.max_iter:
            alive[idx] = False
            break
        act = ~hit
        rows = idx[act]
        if rows.size == 0:
            continue
        step, solvable = engine.step_from_z(zi[act], mui[act], u[act])
        alive[rows[~solvable]] = False
        rows = rows[solvable]
        if rows.size == 0:
            continue
        step = step[solvable]
        if firth:
            ref = norm[act][solvable]
        else:
            # Accept likelihood changes down to summation roundoff; without
            # this slack, steps near the optimum can be rejected forever
            # because the true improvement is below float resolution.
            ref = ll[rows]
            ref = ref - 1e-13 * (1.0 + np.abs(ref))

        lam = np.ones(rows.size)
        accepted = np.zeros(rows.size, dtype=bool)
        cand = beta[rows] + step
        for _ in range(opts.step_halving_max + 1):
            pending = ~accepted
            c_rows = rows[pending]
            c_beta = cand[pending]
            c_mu, c_eta, c_ok = engine.mu_of(c_beta)
            crit = np.full(c_rows.size, -np.inf if not firth else np.inf)
            if np.any(c_ok):
                c_z = y[c_rows[c_ok]] / c_mu[c_ok]
                if firth:
                    c_u = engine.score_from_z(c_z, y[c_rows[c_ok]], c_mu[c_ok])
                    c_norm = np.max(np.abs(c_u), axis=1)
                    crit[c_ok] = np.where(np.isfinite(c_norm), c_norm, np.inf)
                else:
                    crit[c_ok] = engine.loglik_from_z(
                        c_z, c_mu[c_ok], c_eta[c_ok], ll_base[c_rows[c_ok]]
                    )
            good = crit <= ref[pending] if firth else crit >= ref[pending]
            if np.any(good):
                take = c_rows[good]
                beta[take] = c_beta[good]
                mu[take] = c_mu[good]
                eta[take] = c_eta[good]
                if ll is not None:
                    ll[take] = crit[good]
                iterations[take] += 1
                acc = np.flatnonzero(pending)[good]
                accepted[acc] = True
            if np.all(accepted):
                break
            still = ~accepted
            lam[still] *= 0.5
            cand[still] = beta[rows[still]] + lam[still, None] * step[still]
        # Rows that exhausted halving stop where they stand, unconverged.
        alive[rows[~accepted]] = False

    return _BatchFit(
        beta=beta,
        mu=mu,
        converged=converged,
        iterations=iterations,
        final_score_norm=final_norm,
    )


# ---------------------------------------------------------------------------
# public fitting API
# ---------------------------------------------------------------------------

def fit_mle(
    design: Design,
    link: Link | str | None = None,
    opts: FitOptions | None = None,
) -> FitResult:
    """Maximum-likelihood fit by Fisher scoring with step halving.

    Non-convergence is reported through FitResult.converged, never
    silently; a rank-deficient covariate matrix raises RankError.
    """
    link = resolve_link(link)
    opts = opts or FitOptions()
    _check_rank(design.X)
    batch = _scoring(design.y[None, :], design.X, link, opts)
    beta = batch.beta[0]
    mu = predict(design, beta, link)
    info = likelihood.fisher_info(design, beta, link)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError(str(exc)) from exc
    return FitResult(
        beta_hat=beta,
        mu_hat=mu,
        loglik=likelihood.loglik(design, beta, link),
        info=info,
        std_err=np.sqrt(np.diag(cov)),
        iterations=int(batch.iterations[0]),
        converged=bool(batch.converged[0]),
        final_score_norm=float(batch.final_score_norm[0]),
    )


def correct_cox_snell(
    design: Design,
    fit: FitResult,
    link: Link | str | None = None,
) -> CorrectionResult:
    """Analytic second-order correction: beta_hat minus the estimated bias."""
    if not fit.converged:
        raise ValueError("Cox-Snell correction requires a converged fit")
    link = resolve_link(link)
    bias = likelihood.cox_snell_bias(design, fit.beta_hat, link)
    return CorrectionResult(
        method="cox_snell",
        beta_corrected=fit.beta_hat - bias,
        bias_estimate=bias,
        meta={},
    )


def fit_firth(
    design: Design,
    link: Link | str | None = None,
    opts: FitOptions | None = None,
) -> CorrectionResult:
    """Solve the modified score equation U(beta) - I(beta) B(beta) = 0.

    The bias term is re-evaluated at every iterate (preventive scheme).
    The reported bias_estimate is the second-order bias evaluated at the
    returned solution.  Non-convergence is flagged in meta, not raised.
    """
    link = resolve_link(link)
    opts = opts or FitOptions()
    _check_rank(design.X)
    batch = _scoring(design.y[None, :], design.X, link, opts, firth=True)
    beta = batch.beta[0]
    return CorrectionResult(
        method="firth",
        beta_corrected=beta,
        bias_estimate=likelihood.cox_snell_bias(design, beta, link),
        meta={
            "converged": bool(batch.converged[0]),
            "iterations": int(batch.iterations[0]),
            "final_score_norm": float(batch.final_score_norm[0]),
        },
    )


def _bootstrap_beta_bar(
    X: np.ndarray,
    mu_hat: np.ndarray,
    link: Link,
    n_replicates: int,
    rng: np.random.Generator,
    opts: FitOptions,
    beta_start: np.ndarray | None = None,
    max_attempts: int = 10,
) -> tuple[np.ndarray, int, int, int]:
    """Mean of converged bootstrap-replicate estimates (fixed row order).

    Draws all replicate responses up front, fits them as one batch, then
    redraws only the rows that failed to converge, up to max_attempts
    fits per replicate.  Refits warm-start at beta_start when given, and
    under the log link use the observed-information Newton direction: the
    likelihood is strictly concave there, so the refit root is the unique
    maximum-likelihood solution regardless of path, certified by the same
    score tolerance.  Returns (beta_bar, n_converged, n_failed,
    n_redrawn).
    """
    mu_mat = np.broadcast_to(mu_hat, (n_replicates, mu_hat.shape[0]))
    y_star = sample(mu_mat, rng)
    betas = np.empty((n_replicates, X.shape[1]))
    usable = np.zeros(n_replicates, dtype=bool)
    n_redrawn = 0

    fit_opts = FitOptions(
        max_iter=opts.max_iter,
        score_tol=opts.score_tol,
        step_halving_max=opts.step_halving_max,
    )
    pending = np.arange(n_replicates)
    for attempt in range(max_attempts):
        if pending.size == 0:
            break
        if attempt > 0:
            y_star[pending] = sample(
                np.broadcast_to(mu_hat, (pending.size, mu_hat.shape[0])), rng
            )
            n_redrawn += pending.size
        beta0 = None
        if beta_start is not None:
            beta0 = np.broadcast_to(beta_start, (pending.size, X.shape[1])).copy()
        batch = _scoring(y_star[pending], X, link, fit_opts, beta0=beta0, newton=True)
        betas[pending] = batch.beta
        usable[pending] = batch.converged
        pending = pending[~batch.converged]

    n_converged = int(usable.sum())
    beta_bar = betas[usable].mean(axis=0) if n_converged else np.full(X.shape[1], np.nan)
    return beta_bar, n_converged, n_replicates - n_converged, n_redrawn


def correct_bootstrap(
    design: Design,
    fit: FitResult,
    link: Link | str | None = None,
    n_replicates: int = 1000,
    rng: np.random.Generator | None = None,
    opts: FitOptions | None = None,
) -> CorrectionResult:
    """Parametric-bootstrap correction 2 beta_hat - mean(replicate fits).

    Each replicate simulates a response vector from the fitted means and
    refits by maximum likelihood; replicates that fail to converge are
    redrawn (counted in meta) and the whole correction aborts if fewer
    than 90% of replicates end up converged.
    """
    if not fit.converged:
        raise ValueError("bootstrap correction requires a converged fit")
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")
    link = resolve_link(link)
    opts = opts or FitOptions()
    rng = rng if rng is not None else np.random.default_rng()

    beta_bar, n_conv, n_failed, n_redrawn = _bootstrap_beta_bar(
        design.X, fit.mu_hat, link, n_replicates, rng, opts,
        beta_start=fit.beta_hat,
    )
    if n_conv < 0.9 * n_replicates:
        raise BootstrapDegenerateError(
            f"only {n_conv} of {n_replicates} bootstrap replicates converged"
        )
    bias = beta_bar - fit.beta_hat
    return CorrectionResult(
        method="bootstrap",
        beta_corrected=2.0 * fit.beta_hat - beta_bar,
        bias_estimate=bias,
        meta={
            "n_replicates": n_replicates,
            "n_converged": n_conv,
            "n_failed": n_failed,
            "n_redrawn": n_redrawn,
            "beta_bar": beta_bar,
        },
    )


# ---------------------------------------------------------------------------
# baseline fits
# ---------------------------------------------------------------------------

def fit_rayleigh_const(y) -> RayleighMean:
    """No-covariate MLE of the distribution mean: sqrt(pi * mean(y^2) / 4)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size == 0:
        raise ValueError("cannot fit a distribution to an empty sample")
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
        raise DomainError("all observations must be positive and finite")
    return RayleighMean(mu=float(np.sqrt(np.pi * np.mean(y * y) / 4.0)))


def fit_gaussian(design: Design) -> np.ndarray:
    """Ordinary least squares of y on X (the Gaussian-regression baseline)."""
    _check_rank(design.X)
    beta, *_ = np.linalg.lstsq(design.X, design.y, rcond=None)
    return beta
