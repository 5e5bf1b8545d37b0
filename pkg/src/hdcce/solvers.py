"""Penalized and unpenalized solvers on the transformed panel.

The lasso minimizes the exact objective

    (1/nT) * ||y_hat - x_hat b||^2 + lambda * ||b||_1

by cyclic coordinate descent with soft-threshold updates.  No column
standardization is applied.  Full cyclic sweeps alternate with cheap
sweeps over the current active set; the solver only reports convergence
after a full sweep moves no coordinate by more than the tolerance AND the
KKT stationarity conditions hold within 10x the tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, DataError
from .projection import TransformedPanel

_KKT_SLACK = 10.0  # KKT certificate slack, in units of tol


@dataclass
class LassoFit:
    beta_hat: np.ndarray
    lam: float
    objective: float
    active_set: np.ndarray  # indices with beta_hat != 0
    iterations: int  # coordinate-descent sweeps performed
    converged: bool
    objective_path: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kkt_violation: float = np.inf
    zero_variance_cols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    rank_deficient: bool = False


@dataclass
class CvResult:
    lambda_grid: np.ndarray
    cv_errors: np.ndarray
    lambda_star: float
    fold_assignment: np.ndarray  # unit index -> fold index


@njit(cache=True, fastmath=True)
def _cd_pass(X, r, b, thresh, col2, idx):
    """One cyclic pass over the coordinates in idx, maintaining the residual
    r = y - Xb in place; returns the largest absolute coordinate change."""
    nT = X.shape[0]
    max_change = 0.0
    for m in range(idx.size):
        j = idx[m]
        a = col2[j]
        if a <= 0.0:
            continue
        bj = b[j]
        c = bj * a
        for t in range(nT):
            c += X[t, j] * r[t]
        if c > thresh:
            new = (c - thresh) / a
        elif c < -thresh:
            new = (c + thresh) / a
        else:
            new = 0.0
        d = new - bj
        if d != 0.0:
            for t in range(nT):
                r[t] -= d * X[t, j]
            b[j] = new
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


@njit(cache=True, fastmath=True)
def _cd_pass_gram(Q, q, grad, b, thresh, idx):
    """Covariance-update variant of _cd_pass for p <= nT: maintains
    grad = (X'X) b instead of the residual.  Q = X'X, q = X'y."""
    p = Q.shape[0]
    max_change = 0.0
    for m in range(idx.size):
        j = idx[m]
        a = Q[j, j]
        if a <= 0.0:
            continue
        bj = b[j]
        c = q[j] - grad[j] + a * bj
        if c > thresh:
            new = (c - thresh) / a
        elif c < -thresh:
            new = (c + thresh) / a
        else:
            new = 0.0
        d = new - bj
        if d != 0.0:
            for k in range(p):
                grad[k] += d * Q[j, k]  # Q symmetric; row access is contiguous
            b[j] = new
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


def _kkt_from_gradient(g, b, lam) -> float:
    """Max stationarity violation given g = 2/nT * X'(Xb - y): active
    coordinates need g_j + lam*sign(b_j) = 0, inactive ones |g_j| <= lam."""
    active = b != 0
    worst = 0.0
    va = np.abs(g[active] + lam * np.sign(b[active]))
    vi = np.maximum(np.abs(g[~active]) - lam, 0.0)
    if va.size:
        worst = max(worst, float(va.max()))
    if vi.size:
        worst = max(worst, float(vi.max()))
    return worst


class _Workspace:
    """Design-dependent precomputations shared across penalties.

    When p <= nT, coordinate descent runs on the Gram matrix (covariance
    updates, O(p) per coordinate); otherwise it maintains the nT residual.
    """

    def __init__(self, X, y):
        self.X = np.asfortranarray(X, dtype=float)
        self.y = np.ascontiguousarray(y, dtype=float)
        self.nT, self.p = self.X.shape
        self.use_gram = self.p <= self.nT
        if self.use_gram:
            self.Q = np.ascontiguousarray(self.X.T @ self.X)
            self.q = self.X.T @ self.y
            self.col2 = np.ascontiguousarray(np.diag(self.Q))
            self.y2 = float(self.y @ self.y)
        else:
            self.col2 = np.einsum("ij,ij->j", self.X, self.X)

    def solve(self, lam, b0, tol, max_iter):
        """Cyclic coordinate descent with active-set acceleration.  Reports
        convergence only after a full sweep meets the tolerance and the KKT
        conditions hold within the certificate slack."""
        p = self.p
        b = b0.copy()
        thresh = lam * self.nT / 2.0
        if self.use_gram:
            grad = self.Q @ b if np.any(b) else np.zeros(p)
            pass_args = lambda idx: _cd_pass_gram(self.Q, self.q, grad, b, thresh, idx)
            objective = lambda: (
                max(self.y2 - 2.0 * float(b @ self.q) + float(b @ grad), 0.0) / self.nT
                + lam * float(np.abs(b).sum())
            )
            kkt = lambda: _kkt_from_gradient(2.0 / self.nT * (grad - self.q), b, lam)
        else:
            r = self.y - self.X @ b if np.any(b) else self.y.copy()
            pass_args = lambda idx: _cd_pass(self.X, r, b, thresh, self.col2, idx)
            objective = lambda: float(r @ r) / self.nT + lam * float(np.abs(b).sum())
            kkt = lambda: _kkt_from_gradient(-2.0 / self.nT * (self.X.T @ r), b, lam)

        all_idx = np.arange(p, dtype=np.int64)
        obj_path = []
        sweeps = 0
        converged = False
        viol = np.inf
        tol_eff = tol
        while sweeps < max_iter:
            mc = pass_args(all_idx)
            sweeps += 1
            obj_path.append(objective())
            scale = max(1.0, float(np.abs(b).max(initial=0.0)))
            if mc <= tol_eff * scale:
                viol = kkt()
                if viol <= _KKT_SLACK * tol:
                    converged = True
                    break
                # marginal KKT miss: tighten and keep sweeping
                tol_eff *= 0.1
                if tol_eff < 1e-16:
                    break
                continue
            # refine on the active set before the next full sweep
            while sweeps < max_iter:
                act = np.flatnonzero(b).astype(np.int64)
                if act.size == 0 or act.size == p:
                    break
                mca = pass_args(act)
                sweeps += 1
                obj_path.append(objective())
                scale = max(1.0, float(np.abs(b).max(initial=0.0)))
                if mca <= tol_eff * scale:
                    break
        if not converged and viol == np.inf:
            viol = kkt()
        return b, sweeps, converged, np.asarray(obj_path), viol


def lasso(
    panel: TransformedPanel,
    lam: float,
    tol: float = 1e-8,
    max_iter: int = 10000,
    warm_start: Optional[np.ndarray] = None,
) -> LassoFit:
    """Lasso fit on the stacked transformed panel at a single penalty."""
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    if not (np.all(np.isfinite(panel.x_hat)) and np.all(np.isfinite(panel.y_hat))):
        raise DataError("non-finite entries in the transformed panel")
    ws = _Workspace(panel.x_hat, panel.y_hat)
    b0 = np.zeros(ws.p) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
    b, sweeps, converged, obj_path, viol = ws.solve(lam, b0, tol, max_iter)
    return LassoFit(
        beta_hat=b,
        lam=lam,
        objective=float(obj_path[-1]),
        active_set=np.flatnonzero(b),
        iterations=sweeps,
        converged=converged,
        objective_path=obj_path,
        kkt_violation=viol,
        zero_variance_cols=np.flatnonzero(ws.col2 <= 0),
    )


def lambda_max(panel: TransformedPanel) -> float:
    """Smallest penalty with an all-zero lasso solution: 2||X'y||_inf / nT."""
    nT = panel.y_hat.size
    return 2.0 * float(np.abs(panel.x_hat.T @ panel.y_hat).max(initial=0.0)) / nT


def least_squares(panel: TransformedPanel) -> LassoFit:
    """Minimum-norm least squares on the transformed panel (the lasso with
    penalty zero), solved through a rank-tolerant pseudo-inverse of the
    normal equations."""
    X = panel.x_hat
    y = panel.y_hat
    nT, p = X.shape
    if p > nT:
        warnings.warn(
            f"least squares with p={p} > nT={nT}: minimum-norm solution returned",
            stacklevel=2,
        )
    gram = X.T @ X
    rhs = X.T @ y
    ginv = np.linalg.pinv(gram, rcond=1e-10, hermitian=True)
    b = ginv @ rhs
    rank = np.linalg.matrix_rank(gram, hermitian=True)
    r = y - X @ b
    return LassoFit(
        beta_hat=b,
        lam=0.0,
        objective=float(r @ r) / nT,
        active_set=np.flatnonzero(b),
        iterations=0,
        converged=True,
        kkt_violation=_kkt_from_gradient(-2.0 / nT * (X.T @ r), b, 0.0),
        zero_variance_cols=np.flatnonzero(np.diag(gram) <= 0),
        rank_deficient=rank < p,
    )


def default_lambda_grid(panel: TransformedPanel, num: int = 50) -> np.ndarray:
    """50 log-spaced penalties from lambda_max down to 1e-3 * lambda_max."""
    lmax = lambda_max(panel)
    if lmax <= 0:
        raise DataError("lambda_max is zero: design or response is null")
    return np.geomspace(lmax, 1e-3 * lmax, num)


def _unit_rows(units: np.ndarray, T: int) -> np.ndarray:
    return (units[:, None] * T + np.arange(T)[None, :]).reshape(-1)


def _fit_path(X, y, grid, tol, max_iter):
    """Warm-started coordinate descent along a descending penalty grid.
    Returns a (len(grid), p) array of solutions."""
    ws = _Workspace(X, y)
    betas = np.empty((grid.size, ws.p))
    b = np.zeros(ws.p)
    for k, lam in enumerate(grid):
        b, _, conv, _, _ = ws.solve(lam, b, tol, max_iter)
        if not conv:
            warnings.warn(f"lasso path point lambda={lam:g} did not converge", stacklevel=2)
        betas[k] = b
    return betas


def cv_lambda(
    panel: TransformedPanel,
    folds: int = 10,
    grid: Optional[np.ndarray] = None,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> CvResult:
    """Unit-level K-fold cross-validation of the lasso penalty.

    Folds partition units (all T rows of a unit stay together).  Paths are
    warm-started from large to small penalties; the winner minimizes the
    mean held-out squared error per observation.
    """
    n, T = panel.n, panel.T
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    if n < folds:
        raise ConfigError(f"cannot split n={n} units into {folds} folds")
    if grid is None:
        grid = default_lambda_grid(panel)
    else:
        grid = np.asarray(grid, dtype=float)
        if np.any(np.diff(grid) > 0):
            raise ConfigError("lambda grid must be descending")

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    fold_assignment = np.empty(n, dtype=int)
    fold_assignment[perm] = np.arange(n) % folds

    X = panel.x_hat
    y = panel.y_hat
    fold_errors = np.zeros((folds, grid.size))
    for f in range(folds):
        hold_units = np.flatnonzero(fold_assignment == f)
        train_units = np.flatnonzero(fold_assignment != f)
        tr = _unit_rows(train_units, T)
        ho = _unit_rows(hold_units, T)
        betas = _fit_path(X[tr], y[tr], grid, tol, max_iter)
        resid = y[ho][None, :] - betas @ X[ho].T
        fold_errors[f] = (resid**2).sum(axis=1) / ho.size
    cv_errors = fold_errors.mean(axis=0)
    lambda_star = float(grid[int(np.argmin(cv_errors))])
    return CvResult(
        lambda_grid=grid,
        cv_errors=cv_errors,
        lambda_star=lambda_star,
        fold_assignment=fold_assignment,
    )


def effective_noise_lambda(
    panel: TransformedPanel,
    q: float = 0.95,
    nsim: int = 1000,
    noise_sd: float = 1.0,
    seed: int = 0,
) -> float:
    """q-quantile of the simulated effective noise 4||X'e||_inf / nT with
    e ~ N(0, noise_sd^2 I), conditionally on the transformed design."""
    if not 0 < q < 1:
        raise ConfigError("q must lie in (0, 1)")
    if nsim < 1:
        raise ConfigError("nsim must be positive")
    X = panel.x_hat
    nT = X.shape[0]
    rng = np.random.default_rng(seed)
    stats = np.empty(nsim)
    chunk = max(1, min(nsim, int(2e7 // max(1, X.shape[1]))))
    done = 0
    while done < nsim:
        m = min(chunk, nsim - done)
        E = rng.standard_normal((nT, m)) * noise_sd
        stats[done : done + m] = 4.0 * np.abs(X.T @ E).max(axis=0, initial=0.0) / nT
        done += m
    return float(np.quantile(stats, q))  # type-7 linear interpolation


def theory_penalty_rate(n: int, T: int, p: int, h: float = 1.0) -> float:
    """Reference penalty rate h * log(n*p*T) / min(n, sqrt(n*T)).

    A scaling utility for rate checks only, not a practical selector (the
    slowly diverging factor h is unspecified in finite samples).
    """
    return h * np.log(n * p * T) / min(n, np.sqrt(n * T))
