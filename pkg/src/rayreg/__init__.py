"""Mean-parameterized Rayleigh regression with small-sample bias corrections.

The package fits the regression model in which a positive signal follows
a Rayleigh law whose mean is linked to covariates, and provides three
bias-adjusted estimators for short signals (analytic second-order
correction, modified-score fitting, and a parametric bootstrap), plus a
Monte Carlo harness, figures of merit, and data-ingestion utilities.
"""

from .design import Design, predict
from .distribution import (
    RayleighMean,
    cdf,
    logpdf,
    moments,
    pdf,
    quantile,
    sample,
)
from .errors import (
    BootstrapDegenerateError,
    DataError,
    DomainError,
    NonAdmissibleMeanError,
    RankError,
    RayregError,
    ScenarioError,
    SingularInformationError,
    UndefinedRelativeBiasError,
)
from .estimators import (
    CorrectionResult,
    FitOptions,
    FitResult,
    correct_bootstrap,
    correct_cox_snell,
    fit_firth,
    fit_gaussian,
    fit_mle,
    fit_rayleigh_const,
)
from .dataio import (
    ChannelMatrix,
    WindowFitReport,
    WindowSpec,
    extract_window,
    fit_window_model,
    load_channel,
    load_dataset,
    save_design,
)
from .likelihood import (
    BiasWeights,
    ScoreInfo,
    bias_via_cumulants,
    bias_weights,
    cox_snell_bias,
    fisher_info,
    loglik,
    score,
    score_info,
)
from .links import IdentityLink, Link, LogLink, resolve_link
from .metrics import (
    EstimatorSample,
    fitted_rmse,
    irbsn,
    relative_bias_pct,
    rmse_param,
)
from .simulation import (
    BernoulliCovariates,
    CellResult,
    ExplicitCovariates,
    McConfig,
    McSummary,
    RayleighCovariates,
    Scenario,
    cells_from_csv,
    preset_scenarios,
    report_tables,
    run_scenario,
    scenario_from_dict,
    summaries_to_csv,
    summaries_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "BernoulliCovariates",
    "BiasWeights",
    "BootstrapDegenerateError",
    "CellResult",
    "ChannelMatrix",
    "CorrectionResult",
    "DataError",
    "Design",
    "DomainError",
    "EstimatorSample",
    "ExplicitCovariates",
    "FitOptions",
    "FitResult",
    "IdentityLink",
    "Link",
    "LogLink",
    "McConfig",
    "McSummary",
    "NonAdmissibleMeanError",
    "RankError",
    "RayleighCovariates",
    "RayleighMean",
    "RayregError",
    "Scenario",
    "ScenarioError",
    "ScoreInfo",
    "SingularInformationError",
    "UndefinedRelativeBiasError",
    "WindowFitReport",
    "WindowSpec",
    "bias_via_cumulants",
    "bias_weights",
    "cdf",
    "cells_from_csv",
    "correct_bootstrap",
    "correct_cox_snell",
    "cox_snell_bias",
    "extract_window",
    "fisher_info",
    "fit_firth",
    "fit_gaussian",
    "fit_mle",
    "fit_rayleigh_const",
    "fit_window_model",
    "fitted_rmse",
    "irbsn",
    "load_channel",
    "load_dataset",
    "loglik",
    "logpdf",
    "moments",
    "pdf",
    "predict",
    "preset_scenarios",
    "quantile",
    "relative_bias_pct",
    "report_tables",
    "resolve_link",
    "rmse_param",
    "run_scenario",
    "sample",
    "save_design",
    "scenario_from_dict",
    "score",
    "score_info",
    "summaries_to_csv",
    "summaries_to_json",
]
