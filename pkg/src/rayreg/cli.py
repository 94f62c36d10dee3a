"""Command-line interface.

Subcommands:
    fit         fit one CSV dataset and report coefficient estimates
    simulate    run a Monte Carlo scenario grid and emit summary tables
    window-fit  fit the windowed channel-regression models
    sample      emit random draws from the mean-parameterized distribution

Exit code 0 means every requested fit converged and no validation error
occurred; any failure exits 1 with a message on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    WindowSpec,
    fit_window_model,
    load_channel,
    load_dataset,
)
from .design import predict
from .distribution import sample
from .errors import RayregError
from .estimators import (
    correct_bootstrap,
    correct_cox_snell,
    fit_firth,
    fit_mle,
)
from .metrics import fitted_rmse
from .simulation import (
    McConfig,
    preset_scenarios,
    report_tables,
    run_scenario,
    scenario_from_dict,
    summaries_to_csv,
    summaries_to_json,
)

DEFAULT_SEED = 1009


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _cmd_fit(args) -> int:
    design = load_dataset(args.data, add_intercept=args.intercept)
    mle = fit_mle(design, args.link)
    converged = mle.converged
    method = args.method
    bias = None
    if method == "mle":
        beta = mle.beta_hat
    elif method == "coxsnell":
        corr = correct_cox_snell(design, mle, args.link)
        beta, bias = corr.beta_corrected, corr.bias_estimate
    elif method == "firth":
        corr = fit_firth(design, args.link)
        beta, bias = corr.beta_corrected, corr.bias_estimate
        converged = converged and bool(corr.meta["converged"])
    else:  # bootstrap
        corr = correct_bootstrap(
            design, mle, args.link,
            n_replicates=args.boot_reps,
            rng=np.random.default_rng(args.seed),
        )
        beta, bias = corr.beta_corrected, corr.bias_estimate

    mu = predict(design, beta, args.link)
    doc = {
        "method": method,
        "link": args.link,
        "n_obs": design.n_obs,
        "converged": bool(converged),
        "iterations": mle.iterations,
        "loglik_mle": mle.loglik,
        "beta": [float(b) for b in beta],
        "std_err_mle": [float(s) for s in mle.std_err],
        "bias_estimate": None if bias is None else [float(b) for b in bias],
        "fitted_rmse": fitted_rmse(design.y, mu),
    }
    if args.format == "json":
        _write_or_print(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        lines = ["param,estimate,std_err_mle,bias_estimate"]
        for j, b in enumerate(beta):
            bias_cell = "" if bias is None else _fmt(bias[j])
            lines.append(f"{j + 1},{_fmt(b)},{_fmt(mle.std_err[j])},{bias_cell}")
        lines.append(f"# converged={converged} loglik_mle={_fmt(mle.loglik)} "
                     f"fitted_rmse={_fmt(doc['fitted_rmse'])}")
        _write_or_print("\n".join(lines) + "\n", args.out)
    if not converged:
        print("fit did not converge", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _resolve_scenario(token: str):
    presets = preset_scenarios()
    if token == "1":
        return presets[0]
    if token == "2":
        return presets[1]
    path = Path(token)
    if not path.exists():
        raise RayregError(
            f"--scenario must be 1, 2, or a config file; {token!r} not found"
        )
    return scenario_from_dict(json.loads(path.read_text(encoding="utf-8")))


def _cmd_simulate(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    sizes = tuple(int(s) for s in args.sizes.split(","))
    config = McConfig(
        n_mc=args.mc, n_boot=args.boot_reps, sizes=sizes, seed=args.seed
    )
    summary = run_scenario(scenario, config)
    csv_text = summaries_to_csv([summary])
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        out = Path(args.out)
        out.write_text(csv_text, encoding="utf-8")
        out.with_suffix(".json").write_text(
            summaries_to_json([summary]), encoding="utf-8"
        )
        sys.stdout.write(report_tables([summary]))
    return 0


# ---------------------------------------------------------------------------
# window-fit
# ---------------------------------------------------------------------------

def _cmd_window_fit(args) -> int:
    y_channel = load_channel(args.y_channel)
    x_channel = load_channel(args.x_channel)
    spec = WindowSpec(top=args.top, left=args.left, size=args.size)
    report = fit_window_model(
        y_channel, x_channel, spec,
        method=args.method, n_boot=args.boot_reps, seed=args.seed,
    )
    lines = ["quantity,method,param,value"]
    for name, beta in report.estimates.items():
        for j, b in enumerate(beta):
            lines.append(f"beta,{name},{j + 1},{_fmt(b)}")
    for column, value in report.fitted_rmse.items():
        lines.append(f"fitted_rmse,{column},,{_fmt(value)}")
    csv_text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        out = Path(args.out)
        out.write_text(csv_text, encoding="utf-8")
        doc = {
            "window": {"top": spec.top, "left": spec.left, "size": spec.size},
            "n_obs": report.n_obs,
            "method": report.method,
            "converged": report.converged,
            "estimates": {k: [float(b) for b in v] for k, v in report.estimates.items()},
            "fitted_rmse": {k: float(v) for k, v in report.fitted_rmse.items()},
        }
        out.with_suffix(".json").write_text(
            json.dumps(doc, indent=2) + "\n", encoding="utf-8"
        )
    if not report.converged:
        print("window fit did not converge", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def _cmd_sample(args) -> int:
    rng = np.random.default_rng(args.seed)
    draws = sample(args.mu, rng, size=args.n)
    sys.stdout.write("".join(_fmt(v) + "\n" for v in np.atleast_1d(draws)))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rayreg",
        description="Rayleigh regression with small-sample bias-adjusted estimators",
    )
    parser.add_argument("--version", action="version", version=f"rayreg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a CSV dataset")
    p_fit.add_argument("--data", required=True, help="CSV file (first column 'y')")
    p_fit.add_argument("--link", choices=["log", "identity"], default="log")
    p_fit.add_argument(
        "--method", choices=["mle", "coxsnell", "firth", "bootstrap"], default="mle"
    )
    p_fit.add_argument("--boot-reps", type=int, default=1000)
    p_fit.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_fit.add_argument(
        "--intercept", action=argparse.BooleanOptionalAction, default=True,
        help="prepend a ones column (default on)",
    )
    p_fit.add_argument("--out", default=None)
    p_fit.add_argument("--format", choices=["csv", "json"], default="csv")
    p_fit.set_defaults(func=_cmd_fit)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    p_sim.add_argument(
        "--scenario", required=True, help="1, 2, or a JSON scenario config file"
    )
    p_sim.add_argument("--sizes", default="9,25,49", help="comma-separated N values")
    p_sim.add_argument("--mc", type=int, default=5000)
    p_sim.add_argument("--boot-reps", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sim.add_argument("--out", default=None, help="CSV path; JSON mirror written alongside")
    p_sim.set_defaults(func=_cmd_simulate)

    p_win = sub.add_parser("window-fit", help="fit a pixel window of two channels")
    p_win.add_argument("--y-channel", required=True)
    p_win.add_argument("--x-channel", required=True)
    p_win.add_argument("--top", type=int, required=True)
    p_win.add_argument("--left", type=int, required=True)
    p_win.add_argument("--size", type=int, required=True)
    p_win.add_argument(
        "--method", choices=["mle", "coxsnell", "firth", "bootstrap"], default="mle"
    )
    p_win.add_argument("--boot-reps", type=int, default=1000)
    p_win.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_win.add_argument("--out", default=None)
    p_win.set_defaults(func=_cmd_window_fit)

    p_sample = sub.add_parser("sample", help="emit distribution draws")
    p_sample.add_argument("--mu", type=float, required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sample.set_defaults(func=_cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RayregError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
