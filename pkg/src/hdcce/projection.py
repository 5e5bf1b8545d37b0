"""Projection matrices onto the orthogonal complement of a factor proxy.

Three constructors share the same rank-tolerant pseudo-inverse core:

* ``hd_projection``     -- complement of W = xbar @ (leading eigenvectors)
* ``oracle_projection`` -- complement of the true factor matrix F
* ``classical_cce_projection`` -- complement of the raw averages xbar
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DataError
from .simulate import PanelDataset
from .spectral import SpectralSummary

# eigenvalues of the Gram matrix below this relative level count as zero
_RANK_RTOL = 1e-10


@dataclass
class ProjectionMatrix:
    """Symmetric idempotent T x T matrix annihilating the columns of basis."""

    mat: np.ndarray
    kind: str  # "hd-cce" | "oracle" | "classical-cce"
    basis: np.ndarray  # T x m, columns span the projected-away space
    rank_removed: int
    k: int | None = None  # factor count used (hd-cce / oracle)
    identity_fallback: bool = False  # k=0: nothing projected away

    @property
    def T(self) -> int:
        return self.mat.shape[0]


@dataclass
class TransformedPanel:
    """Projected panel stacked unit-major: row i*T + t is unit i, time t."""

    y_hat: np.ndarray  # (n*T,)
    x_hat: np.ndarray  # (n*T, p)
    n: int
    T: int

    @property
    def p(self) -> int:
        return self.x_hat.shape[1]


def _complement_projector(basis: np.ndarray, kind: str, k: int | None = None) -> ProjectionMatrix:
    """I - B (B'B)^- B' with eigenvalues of B'B below _RANK_RTOL * max
    treated as zero."""
    B = np.asarray(basis, dtype=float)
    T = B.shape[0]
    if B.ndim != 2:
        raise DataError(f"basis must be a matrix, got shape {B.shape}")
    if B.shape[1] == 0:
        return ProjectionMatrix(np.eye(T), kind, B, 0, k=k)
    gram = B.T @ B
    w, V = scipy.linalg.eigh(gram)
    cutoff = _RANK_RTOL * max(w[-1], 0.0)
    keep = w > cutoff
    rank = int(keep.sum())
    if rank == 0:
        return ProjectionMatrix(np.eye(T), kind, B, 0, k=k)
    Vk = V[:, keep]
    ginv = (Vk / w[keep]) @ Vk.T
    P = np.eye(T) - B @ ginv @ B.T
    P = (P + P.T) / 2.0
    return ProjectionMatrix(P, kind, B, rank, k=k)


def hd_projection(
    xbar: np.ndarray,
    spectral: SpectralSummary,
    k_hat: int,
) -> ProjectionMatrix:
    """Projection onto the complement of W = xbar @ U_khat.

    k_hat = 0 returns the identity with ``identity_fallback`` set: downstream
    estimation then degrades to a plain (unprojected) regression.
    """
    xbar = np.asarray(xbar, dtype=float)
    T, p = xbar.shape
    if k_hat == 0:
        proj = ProjectionMatrix(
            np.eye(T), "hd-cce", np.zeros((T, 0)), 0, k=0, identity_fallback=True
        )
        return proj
    if not 1 <= k_hat <= min(p, T):
        raise DataError(f"k_hat={k_hat} outside [0, min(p, T)={min(p, T)}]")
    W = xbar @ spectral.eigvecs[:, :k_hat]
    return _complement_projector(W, "hd-cce", k=k_hat)


def oracle_projection(F: np.ndarray) -> ProjectionMatrix:
    """Projection onto the complement of the true factor columns."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise DataError(f"F must be T x K, got shape {F.shape}")
    return _complement_projector(F, "oracle", k=F.shape[1])


def classical_cce_projection(xbar: np.ndarray) -> ProjectionMatrix:
    """Classical CCE proxy: complement of the column space of xbar.

    When p >= T and xbar has full rank this is the zero matrix (the
    breakdown regime of classical CCE).
    """
    return _complement_projector(np.asarray(xbar, dtype=float), "classical-cce")


def transform_panel(proj: ProjectionMatrix, panel: PanelDataset) -> TransformedPanel:
    """Apply the projection to every unit's response and regressor columns."""
    n, T, p = panel.n, panel.T, panel.p
    if proj.T != T:
        raise DataError(f"projection is {proj.T}x{proj.T} but panel has T={T}")
    P = proj.mat
    y_hat = (P @ panel.Y.T).T.reshape(n * T)
    # (T, n*p) gemm, then back to unit-major stacked design
    xr = panel.X.transpose(1, 0, 2).reshape(T, n * p)
    x_hat = (P @ xr).reshape(T, n, p).transpose(1, 0, 2).reshape(n * T, p)
    return TransformedPanel(y_hat=y_hat, x_hat=x_hat, n=n, T=T)
