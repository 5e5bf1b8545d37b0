"""Synthetic panel generator.

Draws panels Y_it = beta'X_it + gamma_i'F_t + eps_it where the regressors
X_it = Gamma_i F_t + Z_it share the same latent AR(1) factors F_t.  The
loading pattern is block-structured: the first three regressors load on all
K=3 factors, and each of the three remaining groups of d regressors loads on
exactly one factor.  All randomness derives from a single 64-bit seed via
counter-based substreams, so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError

# Fixed substream indices for the master-seed split.  Append-only: adding a
# new component must use a fresh index so existing streams are unchanged.
_STREAM_FACTORS = 0
_STREAM_LOADINGS = 1
_STREAM_Z = 2
_STREAM_EPS = 3


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of the data-generating process.

    p = 3 + 3*d regressors; only the first three have nonzero coefficients
    by default.  ``z_var_tail`` defaults to 2.25 so that all regressors share
    the same unconditional second moment E[X^2] = 4.25.
    """

    n: int
    T: int
    d: int
    rho: float = 0.25
    K: int = 3
    ar_coef: float = 0.5
    innov_var: float = 0.75
    z_var_head: float = 1.0
    z_var_tail: float = 2.25
    beta: Optional[tuple] = None
    seed: int = 0

    @property
    def p(self) -> int:
        return 3 + 3 * self.d

    @property
    def loading_dim(self) -> int:
        # gamma_i (K) + dense 3x3 block (9) + one loading per group regressor
        return self.K + 9 + 3 * self.d

    def beta_vector(self) -> np.ndarray:
        if self.beta is None:
            b = np.zeros(self.p)
            b[:3] = 1.0
            return b
        b = np.asarray(self.beta, dtype=float)
        if b.shape != (self.p,):
            raise ConfigError(f"beta must have length p={self.p}, got {b.shape}")
        return b

    def validate(self) -> None:
        if self.n < 1 or self.T < 1 or self.d < 0:
            raise ConfigError("need n >= 1, T >= 1, d >= 0")
        if self.K != 3:
            raise ConfigError("the DGP is defined for K = 3 factors")
        if not abs(self.ar_coef) < 1:
            raise ConfigError("ar_coef must lie in (-1, 1)")
        if self.innov_var <= 0 or self.z_var_head <= 0 or self.z_var_tail <= 0:
            raise ConfigError("variances must be positive")
        q = self.loading_dim
        # equicorrelation matrix is PD iff -1/(q-1) < rho < 1
        if not (-1.0 / (q - 1) < self.rho < 1.0):
            raise ConfigError(
                f"rho={self.rho} makes the loading covariance non positive definite"
            )
        self.beta_vector()


@dataclass
class FactorStructure:
    """Latent truth retained from a simulation run."""

    F: np.ndarray  # T x K
    gamma: np.ndarray  # n x K
    Gamma: np.ndarray  # n x p x K (structural zeros outside the block pattern)
    Z: np.ndarray  # n x T x p
    eps: np.ndarray  # n x T


@dataclass
class PanelDataset:
    """Observed panel: responses Y (n x T) and regressors X (n x T x p)."""

    Y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        if self.Y.ndim != 2 or self.X.ndim != 3 or self.X.shape[:2] != self.Y.shape:
            raise ConfigError(
                f"inconsistent panel shapes Y{self.Y.shape} X{self.X.shape}"
            )

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def T(self) -> int:
        return self.Y.shape[1]

    @property
    def p(self) -> int:
        return self.X.shape[2]


def mean_loading_matrix(d: int) -> np.ndarray:
    """Mean of the regressor loading matrix: diag(0.5) on the top 3x3 block,
    then three stacked d-blocks of ones, one per factor column."""
    if d < 0:
        raise ConfigError("d must be nonnegative")
    p = 3 + 3 * d
    gbar = np.zeros((p, 3))
    gbar[:3, :3] = 0.5 * np.eye(3)
    for g in range(3):
        gbar[3 + g * d : 3 + (g + 1) * d, g] = 1.0
    return gbar


def _draw_factors(cfg: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) factors, initialized from the exact stationary law."""
    stat_sd = np.sqrt(cfg.innov_var / (1.0 - cfg.ar_coef**2))
    F = np.empty((cfg.T, cfg.K))
    F[0] = rng.normal(0.0, stat_sd, cfg.K)
    innov = rng.normal(0.0, np.sqrt(cfg.innov_var), (cfg.T - 1, cfg.K))
    for t in range(1, cfg.T):
        F[t] = cfg.ar_coef * F[t - 1] + innov[t - 1]
    return F


def _draw_loadings(cfg: SimulationConfig, rng: np.random.Generator):
    """Joint normal draw of (gamma_i, nonzero entries of Gamma_i) with unit
    variances and pairwise correlation rho."""
    q = cfg.loading_dim
    d = cfg.d
    mu = np.concatenate(
        [np.ones(3), (0.5 * np.eye(3)).ravel(), np.ones(3 * d)]
    )
    omega = np.full((q, q), cfg.rho)
    np.fill_diagonal(omega, 1.0)
    try:
        L = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by validate
        raise ConfigError("loading covariance is not positive definite") from exc
    G = mu + rng.standard_normal((cfg.n, q)) @ L.T

    gamma = G[:, :3].copy()
    Gamma = np.zeros((cfg.n, cfg.p, cfg.K))
    Gamma[:, :3, :] = G[:, 3:12].reshape(cfg.n, 3, 3)
    if d > 0:
        groups = G[:, 12:].reshape(cfg.n, 3, d)
        for g in range(3):
            Gamma[:, 3 + g * d : 3 + (g + 1) * d, g] = groups[:, g, :]
    return gamma, Gamma


def simulate_panel(config: SimulationConfig):
    """Simulate one panel; returns (PanelDataset, FactorStructure).

    Identical config (including seed) yields bit-identical output.
    """
    config.validate()
    n, T, p = config.n, config.T, config.p
    beta = config.beta_vector()

    F = _draw_factors(config, _substream(config.seed, _STREAM_FACTORS))
    gamma, Gamma = _draw_loadings(config, _substream(config.seed, _STREAM_LOADINGS))

    z_sd = np.sqrt(
        np.concatenate([np.full(3, config.z_var_head), np.full(3 * config.d, config.z_var_tail)])
    )
    Z = _substream(config.seed, _STREAM_Z).standard_normal((n, T, p)) * z_sd
    eps = _substream(config.seed, _STREAM_EPS).standard_normal((n, T))

    # X_it = Gamma_i F_t + Z_it  (gemm over the stacked loading rows)
    X = (Gamma.reshape(n * p, config.K) @ F.T).reshape(n, p, T).transpose(0, 2, 1) + Z
    Y = X @ beta + gamma @ F.T + eps

    return PanelDataset(Y=Y, X=X), FactorStructure(F=F, gamma=gamma, Gamma=Gamma, Z=Z, eps=eps)
