"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
numeric failure.  The HDCCE_THREADS environment variable overrides
--threads for the Monte Carlo harness.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import projection_quality
from .errors import ConfigError, DataError, NumericError
from .estimators import (
    EstimatorOptions,
    estimate_cce_pooled,
    estimate_hdcce,
)
from .io import (
    fmt,
    read_json,
    read_x_csv,
    read_y_csv,
    write_beta_csv,
    write_deviations_csv,
    write_json,
    write_metric_csv,
    write_run_diagnostics_csv,
    write_summary_csv,
    write_x_csv,
    write_y_csv,
)
from .montecarlo import ESTIMATOR_IDS, ScenarioSpec, run_scenario, summarize
from .simulate import PanelDataset, SimulationConfig, simulate_panel
from .spectral import (
    cross_sectional_means,
    default_tau,
    khat_threshold,
    ktilde_ratio,
    spectral_summary,
)

DEFAULT_SEED = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdcce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a synthetic panel to disk")
    sim.add_argument("--config", type=Path, help="JSON file with config fields")
    sim.add_argument("--n", type=int)
    sim.add_argument("--T", type=int)
    sim.add_argument("--d", type=int)
    sim.add_argument("--rho", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--beta", type=str, help="comma-separated true coefficients")
    sim.add_argument("--out", type=Path, default=Path("."))

    scree = sub.add_parser("scree", help="eigenvalue table and factor counts")
    scree.add_argument("--x", type=Path, required=True)
    scree.add_argument("--alpha", type=float, default=0.05)

    est = sub.add_parser("estimate", help="fit an estimator on panel CSVs")
    est.add_argument("--x", type=Path, required=True)
    est.add_argument("--y", type=Path, required=True)
    est.add_argument("--method", choices=["lasso", "ls"], default="lasso")
    lam = est.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lambda_value", type=float)
    lam.add_argument("--cv", type=int, metavar="FOLDS")
    lam.add_argument("--effective-noise", type=float, metavar="Q")
    est.add_argument("--noise-sims", type=int, default=1000)
    est.add_argument("--noise-sd", type=float, default=1.0)
    est.add_argument("--alpha-tau", type=float, default=0.05)
    est.add_argument("--k", type=int, help="override the estimated factor count")
    est.add_argument("--raw-columns", type=str, help="1-based columns for steps 1-2")
    est.add_argument("--cce", action="store_true", help="classical pooled CCE instead")
    est.add_argument("--seed", type=int, default=DEFAULT_SEED)
    est.add_argument("--diagnostics", action="store_true")
    est.add_argument("--truth", type=Path, help="truth.json for factor diagnostics")
    est.add_argument("--out", type=Path, default=Path("."))

    mc = sub.add_parser("mc", help="Monte Carlo experiment")
    mc.add_argument("--scenario", choices=["A", "B", "C", "custom"], default="custom")
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--T", type=int, required=True)
    mc.add_argument("--p", type=int, required=True)
    mc.add_argument("--runs", type=int, default=200)
    mc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    mc.add_argument(
        "--estimators",
        type=str,
        default="hd_ls,oracle_ls",
        help=f"comma list from {sorted(ESTIMATOR_IDS)}",
    )
    mc.add_argument("--rho", type=float, default=0.25)
    mc.add_argument("--alpha-tau", type=float, default=0.05)
    mc.add_argument("--lambda-rule", choices=["cv", "effective_noise"], default="cv")
    mc.add_argument("--cv-folds", type=int, default=10)
    mc.add_argument("--noise-q", type=float, default=0.95)
    mc.add_argument("--noise-sims", type=int, default=200)
    mc.add_argument("--threads", type=int, default=1)
    mc.add_argument("--diagnostics", action="store_true")
    mc.add_argument("--out", type=Path, default=Path("."))

    return parser


def _config_from_args(args) -> SimulationConfig:
    fields: dict = {}
    if args.config is not None:
        fields.update(read_json(args.config))
    for name in ("n", "T", "d", "rho", "seed"):
        v = getattr(args, name)
        if v is not None:
            fields[name] = v
    if args.beta is not None:
        fields["beta"] = tuple(float(v) for v in args.beta.split(","))
    elif "beta" in fields and fields["beta"] is not None:
        fields["beta"] = tuple(fields["beta"])
    for req in ("n", "T", "d"):
        if req not in fields:
            raise ConfigError(f"missing required simulate option --{req}")
    fields.setdefault("seed", DEFAULT_SEED)
    return SimulationConfig(**fields)


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    panel, truth = simulate_panel(cfg)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_y_csv(out / "y.csv", panel.Y)
    write_x_csv(out / "x.csv", panel.X)
    write_json(
        out / "truth.json",
        {
            "config": {
                "n": cfg.n, "T": cfg.T, "d": cfg.d, "p": cfg.p, "rho": cfg.rho,
                "K": cfg.K, "ar_coef": cfg.ar_coef, "innov_var": cfg.innov_var,
                "z_var_head": cfg.z_var_head, "z_var_tail": cfg.z_var_tail,
                "seed": cfg.seed,
            },
            "beta": cfg.beta_vector(),
            "F": truth.F,
            "gamma": truth.gamma,
            "Gamma_shape": list(truth.Gamma.shape),
        },
    )
    return 0


def _cmd_scree(args) -> int:
    X = read_x_csv(args.x)
    spec = spectral_summary(cross_sectional_means(X))
    total = spec.eigvals.sum()
    if total <= 0:
        raise DataError("all-zero spectrum")
    shares = spec.eigvals / total
    cum = np.cumsum(shares)
    print("k,eigval,share,cumshare")
    for k in range(spec.eigvals.size):
        print(f"{k + 1},{fmt(spec.eigvals[k])},{fmt(shares[k])},{fmt(cum[k])}")
    tau = default_tau(spec.eigvals, args.alpha)
    print(f"# tau,{fmt(tau)}")
    print(f"# khat,{khat_threshold(spec.eigvals, tau)}")
    print(f"# ktilde,{ktilde_ratio(spec.eigvals, args.alpha)}")
    return 0


def _estimator_options(args, p: int) -> EstimatorOptions:
    if args.lambda_value is not None:
        rule, lam_v, folds, q = "fixed", args.lambda_value, 10, 0.95
    elif args.effective_noise is not None:
        rule, lam_v, folds, q = "effective_noise", 0.0, 10, args.effective_noise
    else:
        rule, lam_v, q = "cv", 0.0, 0.95
        folds = args.cv if args.cv is not None else 10
    raw_cols = None
    if args.raw_columns:
        raw_cols = [int(v) - 1 for v in args.raw_columns.split(",")]
    opts = EstimatorOptions(
        method=args.method,
        alpha_tau=args.alpha_tau,
        k_override=args.k,
        raw_columns=raw_cols,
        lambda_rule=rule,
        lambda_value=lam_v,
        cv_folds=folds,
        noise_quantile=q,
        noise_sims=args.noise_sims,
        noise_sd=args.noise_sd,
    )
    opts.validate(p)
    return opts


def _cmd_estimate(args) -> int:
    X = read_x_csv(args.x)
    Y = read_y_csv(args.y)
    if Y.shape != X.shape[:2]:
        raise DataError(f"y.csv is {Y.shape} but x.csv implies {X.shape[:2]}")
    panel = PanelDataset(Y=Y, X=X)
    factors = None
    if args.truth is not None:
        factors = np.asarray(read_json(args.truth)["F"], dtype=float)
    if args.cce:
        report = estimate_cce_pooled(panel)
    else:
        opts = _estimator_options(args, panel.p)
        report = estimate_hdcce(panel, opts, seed=args.seed, factors=factors)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_json(
        out / "fit.json",
        {
            "beta_hat": report.beta_hat,
            "method": report.method,
            "k_used": report.k_used,
            "lambda_used": report.lambda_used,
            "projection_kind": report.projection_kind,
            "converged": report.converged,
            "degenerate": report.degenerate,
            "diagnostics": report.diagnostics,
        },
    )
    write_beta_csv(out / "beta.csv", report.beta_hat)
    if args.diagnostics:
        metrics = dict(report.diagnostics)
        metrics.pop("eigval_head", None)
        write_metric_csv(out / "diagnostics.csv", metrics)
    return 0


def _cmd_mc(args) -> int:
    threads = int(os.environ.get("HDCCE_THREADS", args.threads))
    spec = ScenarioSpec(
        label=args.scenario,
        n=args.n,
        T=args.T,
        p=args.p,
        estimators=tuple(args.estimators.split(",")),
        runs=args.runs,
        master_seed=args.seed,
        rho=args.rho,
        alpha_tau=args.alpha_tau,
        lambda_rule=args.lambda_rule,
        cv_folds=args.cv_folds,
        noise_quantile=args.noise_q,
        noise_sims=args.noise_sims,
    )
    spec.validate()
    report = run_scenario(spec, threads=threads)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_deviations_csv(out / "deviations.csv", report)
    write_summary_csv(out / "summary.csv", summarize(report))
    write_json(
        out / "meta.json",
        {
            "scenario": spec.label,
            "n": spec.n, "T": spec.T, "p": spec.p, "d": spec.d,
            "estimators": list(spec.estimators),
            "runs": spec.runs,
            "master_seed": spec.master_seed,
            "rho": spec.rho,
            "alpha_tau": spec.alpha_tau,
            "lambda_rule": spec.lambda_rule,
            "cv_folds": spec.cv_folds,
            "noise_quantile": spec.noise_quantile,
            "noise_sims": spec.noise_sims,
            "threads": threads,
            "version": __version__,
            "numpy": np.__version__,
        },
    )
    if args.diagnostics:
        write_run_diagnostics_csv(out / "diagnostics.csv", report)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "scree": _cmd_scree,
        "estimate": _cmd_estimate,
        "mc": _cmd_mc,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
