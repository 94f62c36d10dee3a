"""Monte Carlo harness for estimator benchmarking.

A scenario freezes one covariate matrix per signal length, simulates
responses from the true coefficients, fits the requested estimators on
every replication, and aggregates percentage relative bias, RMSE, and the
integrated relative bias squared norm per (scenario, N, estimator) cell.

Reproducibility contract: every random draw comes from a substream keyed
by (seed, scenario name, N, purpose, replication), so identical inputs
give bit-identical summaries and cells can be recomputed in isolation or
in parallel without changing the numbers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .design import check_means
from .distribution import sample
from .errors import ScenarioError
from .estimators import FitOptions, _batch_inv, _bootstrap_beta_bar, _scoring
from .likelihood import bias_weight, fisher_weight
from .links import Link, resolve_link
from .metrics import EstimatorSample, irbsn, relative_bias_pct, rmse_param

ESTIMATOR_NAMES = ("mle", "cox_snell", "firth", "bootstrap")

_PURPOSE_DESIGN = 0
_PURPOSE_RESPONSE = 1
_PURPOSE_BOOT = 2


# ---------------------------------------------------------------------------
# scenario definition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliCovariates:
    """Covariate entries drawn i.i.d. from {0, 1} with success probability p."""

    p: float = 0.5

    def draw(self, n_rows: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
        return (rng.random((n_rows, n_cols)) < self.p).astype(float)


@dataclass(frozen=True)
class RayleighCovariates:
    """Covariate entries drawn i.i.d. Rayleigh with the given mean."""

    mean: float = 1.0

    def draw(self, n_rows: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
        return sample(np.full((n_rows, n_cols), self.mean), rng)


@dataclass(frozen=True)
class ExplicitCovariates:
    """A fixed covariate matrix; the first n_rows rows are used."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))

    def draw(self, n_rows: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] < n_rows or m.shape[1] != n_cols:
            raise ScenarioError(
                f"explicit covariate matrix {m.shape} cannot supply "
                f"{n_rows} x {n_cols} values"
            )
        return m[:n_rows].copy()


@dataclass(frozen=True)
class Scenario:
    """One simulation configuration: truth, covariate law, link, intercept."""

    name: str
    beta_true: np.ndarray
    covariates: BernoulliCovariates | RayleighCovariates | ExplicitCovariates
    link: str | Link = "log"
    intercept: bool = True
    n_obs: int | None = None  # fixed signal length; None defers to McConfig.sizes

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta_true, dtype=float))
        if beta.ndim != 1 or beta.size < 1 or not np.all(np.isfinite(beta)):
            raise ValueError("beta_true must be a finite non-empty vector")
        n_cov = beta.size - 1 if self.intercept else beta.size
        if n_cov < 0 or (n_cov == 0 and not self.intercept):
            raise ValueError("scenario needs at least one coefficient")
        object.__setattr__(self, "beta_true", beta)

    @property
    def n_params(self) -> int:
        return self.beta_true.size


@dataclass(frozen=True)
class McConfig:
    """Replication counts, sizes, seed, and estimator selection."""

    n_mc: int = 5000
    n_boot: int = 1000
    sizes: tuple[int, ...] = (9, 25, 49)
    seed: int = 1009
    estimators: tuple[str, ...] = ESTIMATOR_NAMES

    def __post_init__(self):
        if self.n_mc < 1 or self.n_boot < 1:
            raise ValueError("n_mc and n_boot must be >= 1")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 2 for s in sizes):
            raise ValueError("sizes must be positive signal lengths")
        object.__setattr__(self, "sizes", sizes)
        ests = tuple(self.estimators)
        unknown = set(ests) - set(ESTIMATOR_NAMES)
        if unknown or not ests:
            raise ValueError(f"unknown estimators {sorted(unknown)}")
        object.__setattr__(self, "estimators", ests)


@dataclass(frozen=True)
class CellResult:
    """Aggregated figures of merit for one (scenario, N, estimator) cell."""

    scenario: str
    n_obs: int
    estimator: str
    rb_pct: np.ndarray
    rmse: np.ndarray
    irbsn: float
    failures: int


@dataclass(frozen=True)
class McSummary:
    """All cells produced by one run_scenario call."""

    scenario: str
    beta_true: np.ndarray
    cells: tuple[CellResult, ...] = field(default_factory=tuple)

    def cell(self, n_obs: int, estimator: str) -> CellResult:
        for c in self.cells:
            if c.n_obs == n_obs and c.estimator == estimator:
                return c
        raise KeyError(f"no cell for N={n_obs}, estimator={estimator!r}")


def preset_scenarios() -> list[Scenario]:
    """The two built-in benchmark scenarios.

    Both use the log link and an intercept column.  Scenario 1 has
    coefficients (0.5, 0.5, 1.0) with Bernoulli(0.5) covariates; scenario 2
    has (2.5, 1.5) with unit-mean Rayleigh covariates.  The covariate
    distribution parameters are a documented convention of this package:
    published benchmark tables can be matched in sign, magnitude, and
    ordering, but not digit for digit, because the exact frozen covariate
    values behind them are not available.
    """
    return [
        Scenario(
            name="scenario-1",
            beta_true=np.array([0.5, 0.5, 1.0]),
            covariates=BernoulliCovariates(p=0.5),
        ),
        Scenario(
            name="scenario-2",
            beta_true=np.array([2.5, 1.5]),
            covariates=RayleighCovariates(mean=1.0),
        ),
    ]


def scenario_from_dict(spec: dict) -> Scenario:
    """Build a Scenario from a plain configuration mapping.

    Expected keys: name, beta_true, covariates ({"kind": "bernoulli",
    "p": ...} | {"kind": "rayleigh", "mean": ...} | {"kind": "explicit",
    "matrix": [[...]]}), and optionally link, intercept, n_obs.
    """
    try:
        cov_spec = dict(spec["covariates"])
        kind = cov_spec.pop("kind")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"scenario config missing covariates.kind: {exc}") from exc
    if kind == "bernoulli":
        covariates = BernoulliCovariates(**cov_spec)
    elif kind == "rayleigh":
        covariates = RayleighCovariates(**cov_spec)
    elif kind == "explicit":
        covariates = ExplicitCovariates(**cov_spec)
    else:
        raise ValueError(f"unknown covariate kind {kind!r}")
    return Scenario(
        name=spec["name"],
        beta_true=np.asarray(spec["beta_true"], dtype=float),
        covariates=covariates,
        link=spec.get("link", "log"),
        intercept=bool(spec.get("intercept", True)),
        n_obs=spec.get("n_obs"),
    )


# ---------------------------------------------------------------------------
# substreams and frozen designs
# ---------------------------------------------------------------------------

def _scenario_key(name: str) -> int:
    return int.from_bytes(
        hashlib.blake2s(name.encode("utf-8"), digest_size=8).digest(), "big"
    )


def _substream(seed: int, key: int, n_obs: int, purpose: int, index: int):
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, key, n_obs, purpose, index]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _frozen_design(scenario: Scenario, n_obs: int, seed: int, key: int) -> np.ndarray:
    k = scenario.n_params
    if n_obs <= k:
        raise ScenarioError(f"signal length {n_obs} must exceed k={k}")
    n_cov = k - 1 if scenario.intercept else k
    rng = _substream(seed, key, n_obs, _PURPOSE_DESIGN, 0)
    for attempt in range(2):
        if n_cov > 0:
            cov = scenario.covariates.draw(n_obs, n_cov, rng)
            X = np.column_stack([np.ones(n_obs), cov]) if scenario.intercept else cov
        else:
            X = np.ones((n_obs, 1))
        if np.linalg.matrix_rank(X) == k:
            return X
        if attempt == 0:
            warnings.warn(
                f"frozen design for {scenario.name!r} (N={n_obs}) is rank "
                "deficient; redrawing once",
                stacklevel=2,
            )
    raise ScenarioError(
        f"could not draw a full-rank design for {scenario.name!r} at N={n_obs}"
    )


def _cox_snell_rows(X: np.ndarray, mu_rows: np.ndarray, link: Link) -> np.ndarray:
    """Second-order bias for a batch of fitted-mean rows sharing X."""
    t = link.dmu_deta(mu_rows)
    wf = fisher_weight(mu_rows, t)
    info = np.einsum("mn,ni,nj->mij", wf, X, X)
    info_inv, ok = _batch_inv(info)
    delta = np.einsum("ni,mij,nj->mn", X, info_inv, X)
    wb = bias_weight(mu_rows, t, link.dmu_deta_dmu(mu_rows))
    bias = np.einsum("mij,nj,mn->mi", info_inv, X, wb * delta)
    bias[~ok] = np.nan
    return bias


# Rows fitted per batched bootstrap call; replications are grouped so each
# call carries about this much work regardless of n_boot.
_BOOT_CHUNK_ROWS = 100_000


def _bootstrap_all(
    X: np.ndarray,
    link: Link,
    mle,
    replications: np.ndarray,
    beta_out: np.ndarray,
    config: McConfig,
    key: int,
    n_obs: int,
    opts: FitOptions,
    max_attempts: int = 10,
) -> list[int]:
    """Bootstrap-correct every retained replication, chunk-batched.

    Each replication draws its resamples from its own substream (so the
    numbers do not depend on how replications are grouped into batches),
    but the refits of a whole group run as one scoring call.  Returns the
    replication indices whose bootstrap was degenerate (under 90%
    converged after redraws); their beta_out rows are left NaN.
    """
    n_boot = config.n_boot
    k = X.shape[1]
    group_size = max(1, _BOOT_CHUNK_ROWS // n_boot)
    degenerate: list[int] = []

    for lo in range(0, replications.size, group_size):
        group = replications[lo:lo + group_size]
        rngs = [
            _substream(config.seed, key, n_obs, _PURPOSE_BOOT, int(r)) for r in group
        ]
        blocks = [
            sample(np.broadcast_to(mle.mu[r], (n_boot, n_obs)), rng)
            for r, rng in zip(group, rngs)
        ]
        y_big = np.concatenate(blocks, axis=0)
        beta0 = np.repeat(mle.beta[group], n_boot, axis=0)
        batch = _scoring(y_big, X, link, opts, beta0=beta0, newton=True)
        betas = batch.beta.reshape(group.size, n_boot, k)
        conv = batch.converged.reshape(group.size, n_boot)

        for j, r in enumerate(group):
            bad = np.flatnonzero(~conv[j])
            for _ in range(max_attempts - 1):
                if bad.size == 0:
                    break
                y_new = sample(np.broadcast_to(mle.mu[r], (bad.size, n_obs)), rngs[j])
                redo = _scoring(
                    y_new, X, link, opts,
                    beta0=np.broadcast_to(mle.beta[r], (bad.size, k)).copy(),
                    newton=True,
                )
                betas[j, bad] = redo.beta
                conv[j, bad] = redo.converged
                bad = bad[~redo.converged]
            n_conv = int(conv[j].sum())
            if n_conv < 0.9 * n_boot:
                degenerate.append(int(r))
            else:
                beta_out[r] = 2.0 * mle.beta[r] - betas[j][conv[j]].mean(axis=0)
    return degenerate


# ---------------------------------------------------------------------------
# the harness
# ---------------------------------------------------------------------------

def run_scenario(scenario: Scenario, config: McConfig) -> McSummary:
    """Run the full Monte Carlo grid for one scenario.

    Replications where any requested estimator fails (MLE or Firth
    non-convergence, or a degenerate bootstrap) are dropped from every
    estimator's aggregate, so all cells of a (scenario, N) block are
    computed on identical retained samples; the drop count is reported as
    `failures` on each cell.
    """
    link = resolve_link(scenario.link)
    beta_true = scenario.beta_true
    key = _scenario_key(scenario.name)
    sizes = (scenario.n_obs,) if scenario.n_obs is not None else config.sizes
    opts = FitOptions()
    cells: list[CellResult] = []

    for n_obs in sizes:
        X = _frozen_design(scenario, n_obs, config.seed, key)
        mu_true = check_means(link.inverse(X @ beta_true), link.name)

        y_all = np.empty((config.n_mc, n_obs))
        for r in range(config.n_mc):
            rng = _substream(config.seed, key, n_obs, _PURPOSE_RESPONSE, r)
            y_all[r] = sample(mu_true, rng)

        mle = _scoring(y_all, X, link, opts, newton=True)
        retained = mle.converged.copy()
        estimates: dict[str, np.ndarray] = {"mle": mle.beta}

        base_idx = np.flatnonzero(retained)
        if "cox_snell" in config.estimators:
            beta_cs = np.full_like(mle.beta, np.nan)
            bias = _cox_snell_rows(X, mle.mu[base_idx], link)
            beta_cs[base_idx] = mle.beta[base_idx] - bias
            bad = base_idx[~np.all(np.isfinite(bias), axis=1)]
            retained[bad] = False
            estimates["cox_snell"] = beta_cs

        if "firth" in config.estimators:
            beta_f = np.full_like(mle.beta, np.nan)
            fbatch = _scoring(
                y_all[base_idx], X, link, opts,
                firth=True, beta0=mle.beta[base_idx], newton=True,
            )
            beta_f[base_idx] = fbatch.beta
            retained[base_idx[~fbatch.converged]] = False
            estimates["firth"] = beta_f

        if "bootstrap" in config.estimators:
            beta_b = np.full_like(mle.beta, np.nan)
            degenerate = _bootstrap_all(
                X, link, mle, np.flatnonzero(retained), beta_b,
                config, key, n_obs, opts,
            )
            retained[degenerate] = False
            estimates["bootstrap"] = beta_b

        kept = np.flatnonzero(retained)
        if kept.size == 0:
            raise ScenarioError(
                f"no replication of {scenario.name!r} at N={n_obs} survived fitting"
            )
        failures = config.n_mc - kept.size

        for name in config.estimators:
            samp = EstimatorSample(estimates[name][kept], beta_true)
            rb = relative_bias_pct(samp)
            cells.append(
                CellResult(
                    scenario=scenario.name,
                    n_obs=n_obs,
                    estimator=name,
                    rb_pct=rb,
                    rmse=rmse_param(samp),
                    irbsn=irbsn(rb),
                    failures=failures,
                )
            )

    return McSummary(scenario=scenario.name, beta_true=beta_true, cells=tuple(cells))


# ---------------------------------------------------------------------------
# reporting and serialization
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def summaries_to_csv(summaries: list[McSummary]) -> str:
    """Flat CSV: one row per scenario x N x estimator x parameter.

    Floats are written in shortest round-trip form, so parsing the file
    reproduces every number bit-exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["scenario", "N", "estimator", "param", "rb_pct", "rmse", "irbsn", "failures"]
    )
    for summary in summaries:
        for cell in summary.cells:
            for j in range(cell.rb_pct.size):
                writer.writerow(
                    [
                        cell.scenario,
                        cell.n_obs,
                        cell.estimator,
                        j + 1,
                        _fmt(cell.rb_pct[j]),
                        _fmt(cell.rmse[j]),
                        _fmt(cell.irbsn),
                        cell.failures,
                    ]
                )
    return out.getvalue()


def cells_from_csv(text: str) -> list[CellResult]:
    """Inverse of summaries_to_csv (numbers restored bit-exactly)."""
    reader = csv.DictReader(io.StringIO(text))
    grouped: dict[tuple[str, int, str], dict] = {}
    for row in reader:
        cell_key = (row["scenario"], int(row["N"]), row["estimator"])
        entry = grouped.setdefault(
            cell_key,
            {"rb": [], "rmse": [], "irbsn": float(row["irbsn"]),
             "failures": int(row["failures"])},
        )
        entry["rb"].append(float(row["rb_pct"]))
        entry["rmse"].append(float(row["rmse"]))
    return [
        CellResult(
            scenario=s,
            n_obs=n,
            estimator=e,
            rb_pct=np.array(v["rb"]),
            rmse=np.array(v["rmse"]),
            irbsn=v["irbsn"],
            failures=v["failures"],
        )
        for (s, n, e), v in grouped.items()
    ]


def summaries_to_json(summaries: list[McSummary]) -> str:
    """Structured mirror of the summaries, bit-exact via repr round trip."""
    doc = {
        "summaries": [
            {
                "scenario": s.scenario,
                "beta_true": [float(b) for b in s.beta_true],
                "cells": [
                    {
                        "n_obs": c.n_obs,
                        "estimator": c.estimator,
                        "rb_pct": [float(v) for v in c.rb_pct],
                        "rmse": [float(v) for v in c.rmse],
                        "irbsn": float(c.irbsn),
                        "failures": c.failures,
                    }
                    for c in s.cells
                ],
            }
            for s in summaries
        ]
    }
    return json.dumps(doc, indent=2) + "\n"


def report_tables(summaries: list[McSummary]) -> str:
    """Human-readable per-size blocks with best-cell highlighting.

    Within each (scenario, N) block the smallest |RB| per parameter and
    the smallest IRBSN are marked with an asterisk.
    """
    if not summaries:
        raise ValueError("no summaries to report")
    lines: list[str] = []
    for summary in summaries:
        k = summary.beta_true.size
        truth = ", ".join(f"{b:g}" for b in summary.beta_true)
        lines.append(f"== {summary.scenario}  (true coefficients: {truth}) ==")
        sizes = sorted({c.n_obs for c in summary.cells})
        for n_obs in sizes:
            block = [c for c in summary.cells if c.n_obs == n_obs]
            lines.append(f"-- N = {n_obs}  (dropped replications: {block[0].failures}) --")
            header = (
                f"{'estimator':<12}"
                + "".join(f"{f'RB%[{j + 1}]':>12}" for j in range(k))
                + "".join(f"{f'RMSE[{j + 1}]':>12}" for j in range(k))
                + f"{'IRBSN':>12}"
            )
            lines.append(header)
            best_rb = [
                min(range(len(block)), key=lambda i: abs(block[i].rb_pct[j]))
                for j in range(k)
            ]
            best_irbsn = min(range(len(block)), key=lambda i: block[i].irbsn)
            for i, cell in enumerate(block):
                row = f"{cell.estimator:<12}"
                for j in range(k):
                    mark = "*" if best_rb[j] == i else ""
                    row += f"{f'{cell.rb_pct[j]:.4f}{mark}':>12}"
                for j in range(k):
                    row += f"{cell.rmse[j]:>12.4f}"
                mark = "*" if best_irbsn == i else ""
                row += f"{f'{cell.irbsn:.4f}{mark}':>12}"
                lines.append(row)
        lines.append("")
    return "\n".join(lines)
