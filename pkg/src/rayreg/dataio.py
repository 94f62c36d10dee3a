"""Dataset and channel-matrix ingestion plus the windowed fitting pipeline.

File formats are deliberately plain: regression datasets are CSV with a
header whose first column is the response, and amplitude channels are
headerless numeric grids (whitespace or comma separated) or PGM images.
All parsing is locale independent (decimal point only) and every emitted
number uses shortest round-trip formatting, so save/load cycles are
bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .design import Design, predict
from .errors import DataError
from .estimators import (
    FitOptions,
    correct_bootstrap,
    correct_cox_snell,
    fit_firth,
    fit_gaussian,
    fit_mle,
    fit_rayleigh_const,
)
from .metrics import fitted_rmse

METHOD_NAMES = ("mle", "coxsnell", "firth", "bootstrap")


# ---------------------------------------------------------------------------
# tabular datasets
# ---------------------------------------------------------------------------

def load_dataset(path, add_intercept: bool = False) -> Design:
    """Read a CSV dataset: header row, response column 'y' first, covariates after.

    Validation is strict: a short or long row, a non-numeric cell, a
    non-finite value, or a non-positive response raises DataError naming
    the offending row (1-based, header is row 1) and column.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [line for line in lines if line.strip() != ""]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    header = [h.strip() for h in rows[0].split(",")]
    if not header or header[0] != "y":
        raise DataError(f"{path}: first column must be named 'y', got {header[:1]}")
    n_fields = len(header)
    if n_fields < 2 and not add_intercept:
        raise DataError(f"{path}: no covariate columns and no intercept requested")

    data = np.empty((len(rows) - 1, n_fields))
    for i, line in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != n_fields:
            raise DataError(
                f"{path}: row {i}: expected {n_fields} fields, got {len(cells)}"
            )
        for j, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {i}, column {header[j]!r}: "
                    f"not a number: {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise DataError(
                    f"{path}: row {i}, column {header[j]!r}: non-finite value"
                )
            data[i - 2, j] = value
        if data[i - 2, 0] <= 0.0:
            raise DataError(
                f"{path}: row {i}: response must be positive, got {data[i - 2, 0]}"
            )

    y = data[:, 0]
    X = data[:, 1:]
    if add_intercept:
        X = np.column_stack([np.ones(y.shape[0]), X]) if X.size else np.ones((y.shape[0], 1))
    return Design(y=y, X=X)


def save_design(design: Design, path) -> None:
    """Write a Design as CSV (columns y, x1..xk) in round-trip precision."""
    path = Path(path)
    k = design.n_params
    lines = ["y," + ",".join(f"x{j + 1}" for j in range(k))]
    for i in range(design.n_obs):
        lines.append(
            ",".join([repr(float(design.y[i]))]
                     + [repr(float(design.X[i, j])) for j in range(k)])
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# channel matrices and windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelMatrix:
    """A 2-D grid of nonnegative amplitude pixels."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise DataError("channel must be a non-empty 2-D grid")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise DataError("channel pixels must be finite and nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WindowSpec:
    """A square pixel window at (top, left), 0-based row-major coordinates."""

    top: int
    left: int
    size: int

    def __post_init__(self):
        if self.top < 0 or self.left < 0 or self.size < 1:
            raise ValueError("window needs top >= 0, left >= 0, size >= 1")


def _parse_pgm(raw: bytes, path: Path) -> np.ndarray:
    tokens: list[bytes] = []
    pos = 0
    # Tokenize the header, skipping '#' comments, until magic+dims+maxval.
    while len(tokens) < 4 and pos < len(raw):
        ch = raw[pos:pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            pos = raw.find(b"\n", pos)
            pos = len(raw) if pos == -1 else pos + 1
        else:
            end = pos
            while end < len(raw) and raw[end:end + 1] not in b" \t\r\n":
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    if len(tokens) < 4:
        raise DataError(f"{path}: truncated PGM header")
    magic, w_tok, h_tok, max_tok = tokens
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if magic == b"P2":
        body = raw[pos:].split()
        if len(body) != width * height:
            raise DataError(
                f"{path}: PGM expects {width * height} pixels, got {len(body)}"
            )
        grid = np.array([float(tok) for tok in body]).reshape(height, width)
    elif magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = width * height * dtype.itemsize
        body = raw[pos:pos + need]
        if len(body) != need:
            raise DataError(f"{path}: PGM pixel data truncated")
        grid = np.frombuffer(body, dtype=dtype).reshape(height, width).astype(float)
    else:
        raise DataError(f"{path}: unsupported PGM magic {magic!r}")
    return grid


def load_channel(path) -> ChannelMatrix:
    """Read an amplitude channel from a numeric text grid or a PGM file."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] in (b"P2", b"P5"):
        return ChannelMatrix(values=_parse_pgm(raw, path))
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise DataError(f"{path}: neither PGM nor a text grid") from None
    rows: list[list[float]] = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",") if "," in line else line.split()
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise DataError(f"{path}: row {i}: non-numeric cell") from None
        if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
            raise DataError(
                f"{path}: row {i}: expected {len(rows[0])} columns, "
                f"got {len(rows[-1])}"
            )
    if not rows:
        raise DataError(f"{path}: empty channel file")
    return ChannelMatrix(values=np.array(rows))


def extract_window(channel: ChannelMatrix, spec: WindowSpec) -> np.ndarray:
    """Row-major flattening of the window; every pixel must be positive."""
    if spec.top + spec.size > channel.rows or spec.left + spec.size > channel.cols:
        raise DataError(
            f"window {spec.size}x{spec.size} at ({spec.top}, {spec.left}) exceeds "
            f"the {channel.rows}x{channel.cols} channel"
        )
    block = channel.values[
        spec.top:spec.top + spec.size, spec.left:spec.left + spec.size
    ]
    if np.any(block <= 0.0):
        raise DataError(
            f"window at ({spec.top}, {spec.left}) contains non-positive pixels"
        )
    return block.reshape(-1).copy()


# ---------------------------------------------------------------------------
# windowed model fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowFitReport:
    """Model comparison for one window: coefficient estimates and the four
    fitted-RMSE columns (Firth regression, MLE regression, Gaussian
    regression, constant-mean distribution)."""

    window: WindowSpec
    n_obs: int
    method: str
    estimates: dict[str, np.ndarray]
    fitted_rmse: dict[str, float]
    converged: bool
    meta: dict = field(default_factory=dict)


RMSE_COLUMNS = (
    "firth_rayleigh_regression",
    "mle_rayleigh_regression",
    "gaussian_regression",
    "rayleigh_distribution",
)


def fit_window_model(
    y_channel: ChannelMatrix,
    x_channel: ChannelMatrix,
    spec: WindowSpec,
    method: str = "mle",
    *,
    n_boot: int = 1000,
    seed: int = 1009,
    opts: FitOptions | None = None,
) -> WindowFitReport:
    """Describe one channel's window by the other through the log link.

    Builds a two-parameter design (intercept plus the covariate-channel
    window), fits the Rayleigh regression by maximum likelihood and by the
    Firth-adjusted score, and reports both alongside the Gaussian-regression
    and constant-mean baselines.  `method` picks which estimator the report
    is headlined by; choosing 'coxsnell' or 'bootstrap' adds that corrected
    estimate to the bundle.
    """
    if method not in METHOD_NAMES:
        raise ValueError(f"method must be one of {METHOD_NAMES}")
    if (y_channel.rows, y_channel.cols) != (x_channel.rows, x_channel.cols):
        raise DataError("response and covariate channels must have the same shape")
    y = extract_window(y_channel, spec)
    x = extract_window(x_channel, spec)
    design = Design(y=y, X=np.column_stack([np.ones(y.size), x]))

    mle = fit_mle(design, "log", opts)
    firth = fit_firth(design, "log", opts)
    gaussian_beta = fit_gaussian(design)
    const = fit_rayleigh_const(y)

    estimates = {"mle": mle.beta_hat, "firth": firth.beta_corrected}
    meta: dict = {"mle_iterations": mle.iterations, "firth": dict(firth.meta)}
    converged = mle.converged and bool(firth.meta["converged"])
    if method == "coxsnell":
        estimates["coxsnell"] = correct_cox_snell(design, mle, "log").beta_corrected
    elif method == "bootstrap":
        boot = correct_bootstrap(
            design, mle, "log", n_replicates=n_boot,
            rng=np.random.default_rng(seed), opts=opts,
        )
        estimates["bootstrap"] = boot.beta_corrected
        meta["bootstrap"] = dict(boot.meta)

    rmse = {
        "firth_rayleigh_regression": fitted_rmse(
            y, predict(design, firth.beta_corrected, "log")
        ),
        "mle_rayleigh_regression": fitted_rmse(y, mle.mu_hat),
        "gaussian_regression": fitted_rmse(y, design.X @ gaussian_beta),
        "rayleigh_distribution": fitted_rmse(y, np.full(y.size, const.mu)),
    }
    return WindowFitReport(
        window=spec,
        n_obs=y.size,
        method=method,
        estimates=estimates,
        fitted_rmse=rmse,
        converged=converged,
        meta=meta,
    )
