"""End-to-end estimation pipelines.

``estimate_hdcce`` runs the three-step procedure: count factors by
eigenvalue thresholding, project away the estimated factor space, then fit
lasso or least squares on the transformed panel.  ``estimate_oracle`` swaps
in the projection built from the true factors, and ``estimate_cce_pooled``
implements the classical pooled CCE estimator (valid for p < T, degenerate
beyond).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .projection import (
    ProjectionMatrix,
    classical_cce_projection,
    hd_projection,
    oracle_projection,
    transform_panel,
)
from .simulate import PanelDataset
from .solvers import (
    LassoFit,
    cv_lambda,
    effective_noise_lambda,
    lasso,
    least_squares,
)
from .spectral import cross_sectional_means, default_tau, khat_threshold, spectral_summary


@dataclass
class EstimatorOptions:
    method: str = "lasso"  # "lasso" | "ls"
    alpha_tau: float = 0.05
    k_override: Optional[int] = None
    raw_columns: Optional[Sequence[int]] = None  # 0-based column indices
    lambda_rule: str = "cv"  # "fixed" | "cv" | "effective_noise"
    lambda_value: float = 0.0
    cv_folds: int = 10
    noise_quantile: float = 0.95
    noise_sims: int = 1000
    noise_sd: float = 1.0
    tol: float = 1e-8
    max_iter: int = 10000

    def validate(self, p: int) -> None:
        if self.method not in ("lasso", "ls"):
            raise ConfigError(f"unknown method {self.method!r}")
        if not 0 < self.alpha_tau < 1:
            raise ConfigError("alpha_tau must lie in (0, 1)")
        if self.lambda_rule not in ("fixed", "cv", "effective_noise"):
            raise ConfigError(f"unknown lambda rule {self.lambda_rule!r}")
        if self.raw_columns is not None:
            cols = np.asarray(self.raw_columns, dtype=int)
            if cols.size == 0 or cols.min() < 0 or cols.max() >= p:
                raise ConfigError("raw_columns must be a nonempty subset of 0..p-1")


@dataclass
class FitReport:
    beta_hat: np.ndarray
    method: str
    k_used: int
    lambda_used: float
    projection_kind: str
    converged: bool = True
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)


def _solve_on(
    tp, opts: EstimatorOptions, seed: int
) -> tuple[LassoFit, float, dict]:
    extra: dict = {}
    if opts.method == "ls":
        fit = least_squares(tp)
        return fit, 0.0, extra
    if opts.lambda_rule == "fixed":
        lam = float(opts.lambda_value)
    elif opts.lambda_rule == "cv":
        cv = cv_lambda(tp, folds=opts.cv_folds, seed=seed, tol=opts.tol, max_iter=opts.max_iter)
        lam = cv.lambda_star
        extra["cv_errors_min"] = float(cv.cv_errors.min())
    else:
        lam = effective_noise_lambda(
            tp,
            q=opts.noise_quantile,
            nsim=opts.noise_sims,
            noise_sd=opts.noise_sd,
            seed=seed,
        )
    fit = lasso(tp, lam, tol=opts.tol, max_iter=opts.max_iter)
    return fit, lam, extra


def _projection_diagnostics(proj: ProjectionMatrix, F: Optional[np.ndarray]) -> dict:
    diag = {}
    if F is not None:
        fn = np.linalg.norm(F)
        diag["proj_factor_ratio"] = (
            float(np.linalg.norm(proj.mat @ F) / fn) if fn > 0 else 0.0
        )
    return diag


def estimate_hdcce(
    panel: PanelDataset,
    opts: Optional[EstimatorOptions] = None,
    seed: int = 0,
    factors: Optional[np.ndarray] = None,
) -> FitReport:
    """Three-step high-dimensional CCE estimator.

    ``factors`` is only used for diagnostics (projection quality against the
    simulation truth); it never enters the estimate.
    """
    opts = opts or EstimatorOptions()
    opts.validate(panel.p)

    xbar_full = cross_sectional_means(panel.X)
    if opts.raw_columns is not None:
        xbar = xbar_full[:, np.asarray(opts.raw_columns, dtype=int)]
    else:
        xbar = xbar_full

    spec = spectral_summary(xbar)
    if opts.k_override is not None:
        k_hat = int(opts.k_override)
        if k_hat > min(xbar.shape):
            raise ConfigError(f"k_override={k_hat} exceeds min(p, T)={min(xbar.shape)}")
        tau = float("nan")
    else:
        tau = default_tau(spec.eigvals, opts.alpha_tau)
        k_hat = khat_threshold(spec.eigvals, tau)

    proj = hd_projection(xbar, spec, k_hat)
    tp = transform_panel(proj, panel)
    fit, lam, extra = _solve_on(tp, opts, seed)

    diag = {
        "tau": tau,
        "eigval_head": spec.eigvals[: min(10, spec.eigvals.size)].tolist(),
        "identity_fallback": proj.identity_fallback,
        "kkt_violation": float(fit.kkt_violation),
        "iterations": fit.iterations,
        **extra,
        **_projection_diagnostics(proj, factors),
    }
    return FitReport(
        beta_hat=fit.beta_hat,
        method=f"hd_{opts.method}",
        k_used=k_hat,
        lambda_used=lam,
        projection_kind=proj.kind,
        converged=fit.converged,
        diagnostics=diag,
    )


def estimate_oracle(
    panel: PanelDataset,
    F: np.ndarray,
    opts: Optional[EstimatorOptions] = None,
    seed: int = 0,
) -> FitReport:
    """Infeasible benchmark: same pipeline with the true-factor projection."""
    opts = opts or EstimatorOptions()
    opts.validate(panel.p)
    F = np.asarray(F, dtype=float)
    if F.shape[0] != panel.T:
        raise DataError(f"factor matrix has {F.shape[0]} rows but panel T={panel.T}")
    proj = oracle_projection(F)
    tp = transform_panel(proj, panel)
    fit, lam, extra = _solve_on(tp, opts, seed)
    diag = {
        "kkt_violation": float(fit.kkt_violation),
        "iterations": fit.iterations,
        **extra,
        **_projection_diagnostics(proj, F),
    }
    return FitReport(
        beta_hat=fit.beta_hat,
        method=f"oracle_{opts.method}",
        k_used=proj.rank_removed,
        lambda_used=lam,
        projection_kind=proj.kind,
        converged=fit.converged,
        diagnostics=diag,
    )


def estimate_cce_pooled(panel: PanelDataset) -> FitReport:
    """Classical pooled CCE with equal unit weights.

    When the cross-sectional average matrix spans all of R^T the classical
    projection is the zero matrix; the report is then flagged degenerate and
    carries the zero (minimum-norm) coefficient vector.
    """
    xbar = cross_sectional_means(panel.X)
    proj = classical_cce_projection(xbar)
    degenerate = proj.rank_removed >= panel.T or np.abs(proj.mat).max() <= 1e-8
    if degenerate:
        return FitReport(
            beta_hat=np.zeros(panel.p),
            method="cce",
            k_used=0,
            lambda_used=0.0,
            projection_kind=proj.kind,
            degenerate=True,
            diagnostics={"proj_max_abs": float(np.abs(proj.mat).max())},
        )
    P = proj.mat
    PX = np.einsum("ts,isp->itp", P, panel.X)
    A = np.einsum("itp,itq->pq", panel.X, PX)
    rhs = np.einsum("itp,it->p", PX, panel.Y)
    beta = np.linalg.pinv(A, rcond=1e-10, hermitian=True) @ rhs
    return FitReport(
        beta_hat=beta,
        method="cce",
        k_used=proj.rank_removed,
        lambda_used=0.0,
        projection_kind=proj.kind,
        diagnostics={"rank_removed": proj.rank_removed},
    )
