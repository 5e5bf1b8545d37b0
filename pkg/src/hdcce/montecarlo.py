"""Seeded Monte Carlo harness.

Each run draws a fresh panel from a seed derived deterministically from the
master seed and the run index, fits every requested estimator on the same
panel, and records deviations at the representative coordinates.  Results
are keyed by run index, so they are identical regardless of worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .estimators import (
    EstimatorOptions,
    estimate_cce_pooled,
    estimate_hdcce,
    estimate_oracle,
)
from .simulate import SimulationConfig, simulate_panel

logger = logging.getLogger("hdcce.montecarlo")

# stable per-estimator substream indices (offset past the simulator's)
ESTIMATOR_IDS = {
    "hd_lasso": 101,
    "hd_ls": 102,
    "oracle_lasso": 103,
    "oracle_ls": 104,
    "cce": 105,
}

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class ScenarioSpec:
    label: str
    n: int
    T: int
    p: int
    estimators: tuple
    runs: int
    master_seed: int
    rho: float = 0.25
    alpha_tau: float = 0.05
    lambda_rule: str = "cv"
    cv_folds: int = 10
    noise_quantile: float = 0.95
    noise_sims: int = 200
    noise_sd: float = 1.0

    @property
    def d(self) -> int:
        return (self.p - 3) // 3

    def validate(self) -> None:
        if self.p < 3 or (self.p - 3) % 3 != 0:
            raise ConfigError(f"p={self.p} must equal 3 + 3d for integer d >= 0")
        if not self.estimators:
            raise ConfigError("estimator list is empty")
        for e in self.estimators:
            if e not in ESTIMATOR_IDS:
                raise ConfigError(f"unknown estimator {e!r}")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        nT = self.n * self.T
        regimes = {
            "A": self.p < self.T,
            "B": self.T <= self.p < nT,
            "C": self.p >= nT,
        }
        if self.label in regimes and not regimes[self.label]:
            raise ConfigError(
                f"label {self.label} inconsistent with (n,T,p)=({self.n},{self.T},{self.p})"
            )

    def representative_coordinates(self) -> tuple:
        """1-based representative regressors, one per loading group."""
        d = self.d
        if d == 0:
            return (1,)
        return (1, 4, 4 + d, 4 + 2 * d)


@dataclass
class RunRecord:
    run: int
    estimator: str
    beta_at: dict  # 1-based coordinate -> estimated coefficient
    l1_error: float
    k_used: int
    converged: bool
    degenerate: bool
    failed: bool = False
    error: str = ""
    kkt_violation: float = float("nan")

    @property
    def excluded(self) -> bool:
        return self.failed or not self.converged


@dataclass
class McReport:
    spec: ScenarioSpec
    records: list
    rep_coords: tuple
    true_beta: np.ndarray

    def deltas(self, estimator: str, j: int, include_excluded: bool = False) -> np.ndarray:
        vals = [
            r.beta_at[j] - self.true_beta[j - 1]
            for r in self.records
            if r.estimator == estimator and (include_excluded or not r.excluded)
        ]
        return np.asarray(vals)


def _run_seed(master_seed: int, run: int) -> int:
    return int(
        np.random.SeedSequence(master_seed, spawn_key=(run,)).generate_state(1, np.uint64)[0]
    )


def _estimator_seed(run_seed: int, name: str) -> int:
    key = ESTIMATOR_IDS[name]
    return int(
        np.random.SeedSequence(run_seed, spawn_key=(key,)).generate_state(1, np.uint64)[0]
    )


def _options_for(spec: ScenarioSpec, method: str) -> EstimatorOptions:
    return EstimatorOptions(
        method=method,
        alpha_tau=spec.alpha_tau,
        lambda_rule=spec.lambda_rule,
        lambda_value=0.0,
        cv_folds=spec.cv_folds,
        noise_quantile=spec.noise_quantile,
        noise_sims=spec.noise_sims,
        noise_sd=spec.noise_sd,
    )


def run_one(spec: ScenarioSpec, r: int) -> list:
    """Simulate run r and fit every requested estimator on the same panel."""
    run_seed = _run_seed(spec.master_seed, r)
    cfg = SimulationConfig(n=spec.n, T=spec.T, d=spec.d, rho=spec.rho, seed=run_seed)
    panel, truth = simulate_panel(cfg)
    beta = cfg.beta_vector()
    reps = spec.representative_coordinates()

    records = []
    for name in spec.estimators:
        est_seed = _estimator_seed(run_seed, name)
        try:
            if name == "hd_lasso":
                rep = estimate_hdcce(panel, _options_for(spec, "lasso"), seed=est_seed)
            elif name == "hd_ls":
                rep = estimate_hdcce(panel, _options_for(spec, "ls"), seed=est_seed)
            elif name == "oracle_lasso":
                rep = estimate_oracle(panel, truth.F, _options_for(spec, "lasso"), seed=est_seed)
            elif name == "oracle_ls":
                rep = estimate_oracle(panel, truth.F, _options_for(spec, "ls"), seed=est_seed)
            else:
                rep = estimate_cce_pooled(panel)
        except Exception as exc:  # individual failures never abort the batch
            records.append(
                RunRecord(
                    run=r,
                    estimator=name,
                    beta_at={j: float("nan") for j in reps},
                    l1_error=float("nan"),
                    k_used=-1,
                    converged=False,
                    degenerate=False,
                    failed=True,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        records.append(
            RunRecord(
                run=r,
                estimator=name,
                beta_at={j: float(rep.beta_hat[j - 1]) for j in reps},
                l1_error=float(np.abs(rep.beta_hat - beta).sum()),
                k_used=rep.k_used,
                converged=rep.converged,
                degenerate=rep.degenerate,
                kkt_violation=float(rep.diagnostics.get("kkt_violation", float("nan"))),
            )
        )
    return records


def run_scenario(spec: ScenarioSpec, threads: int = 1) -> McReport:
    spec.validate()
    per_run: dict = {}
    if threads <= 1:
        for r in range(spec.runs):
            per_run[r] = run_one(spec, r)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for r, recs in zip(
                range(spec.runs), pool.map(run_one, [spec] * spec.runs, range(spec.runs))
            ):
                per_run[r] = recs
    records = [rec for r in range(spec.runs) for rec in per_run[r]]
    n_bad = sum(1 for rec in records if rec.excluded)
    if n_bad:
        logger.warning("%d of %d fits excluded (failed or non-converged)", n_bad, len(records))
    cfg = SimulationConfig(n=spec.n, T=spec.T, d=spec.d, rho=spec.rho, seed=0)
    return McReport(
        spec=spec,
        records=records,
        rep_coords=spec.representative_coordinates(),
        true_beta=cfg.beta_vector(),
    )


def summarize(report: McReport) -> list:
    """Boxplot-ready rows: one per (estimator, coordinate) plus an 'l1' row
    per estimator for the total l1 estimation error."""
    if not report.records:
        raise ConfigError("empty report")
    rows = []
    for name in report.spec.estimators:
        recs = [r for r in report.records if r.estimator == name]
        kept = [r for r in recs if not r.excluded]
        n_excluded = len(recs) - len(kept)
        for j in report.rep_coords:
            vals = np.asarray([r.beta_at[j] for r in kept])
            deltas = vals - report.true_beta[j - 1]
            rows.append(
                _summary_row(name, str(j), deltas, len(kept), n_excluded,
                             share_zero=float(np.mean(vals == 0.0)) if vals.size else float("nan"))
            )
        l1 = np.asarray([r.l1_error for r in kept])
        rows.append(_summary_row(name, "l1", l1, len(kept), n_excluded, share_zero=float("nan")))
    return rows


def _summary_row(estimator, coordinate, vals, n_runs, n_excluded, share_zero):
    if vals.size:
        qs = np.quantile(vals, QUANTILE_LEVELS)
        mean = float(vals.mean())
    else:
        qs = np.full(len(QUANTILE_LEVELS), float("nan"))
        mean = float("nan")
    return {
        "estimator": estimator,
        "coordinate": coordinate,
        "q05": float(qs[0]),
        "q25": float(qs[1]),
        "median": float(qs[2]),
        "q75": float(qs[3]),
        "q95": float(qs[4]),
        "mean": mean,
        "share_exact_zero": share_zero,
        "n_runs": n_runs,
        "n_excluded": n_excluded,
    }
