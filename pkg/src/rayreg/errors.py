"""Exception types shared across the package."""


class RayregError(Exception):
    """Base class for all rayreg errors."""


class DomainError(RayregError, ValueError):
    """An argument is outside the mathematical domain (e.g. y <= 0, mu <= 0)."""


class NonAdmissibleMeanError(DomainError):
    """A linear predictor maps to a mean that is not strictly positive and finite."""


class RankError(RayregError, ValueError):
    """The covariate matrix does not have full column rank."""


class SingularInformationError(RayregError, ValueError):
    """The Fisher information matrix could not be inverted."""


class BootstrapDegenerateError(RayregError, RuntimeError):
    """Too few bootstrap replicates converged for the correction to be trusted."""


class UndefinedRelativeBiasError(RayregError, ValueError):
    """Relative bias is requested for a parameter whose true value is zero."""


class ScenarioError(RayregError, ValueError):
    """A simulation scenario cannot produce a usable frozen design."""


class DataError(RayregError, ValueError):
    """A dataset or channel file failed validation; message names row/column."""
