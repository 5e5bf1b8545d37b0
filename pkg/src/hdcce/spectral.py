"""Cross-sectional averaging, the p x p second-moment matrix of the averages,
its eigendecomposition, and the two factor-count selectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

# relative clamp for tiny negative eigenvalues from floating point
_EIG_CLAMP = 1e-10
# slack when comparing cumulative eigenvalue shares against 1 - alpha
_SHARE_TOL = 1e-12


@dataclass
class SpectralSummary:
    """Eigenstructure of sigma_hat = xbar' xbar / T.

    Only the min(p, T) potentially-nonzero eigenpairs are materialized;
    eigenvalues beyond that are exact zeros by the rank argument.  eigvecs
    has shape (p, min(p, T)) with orthonormal columns, sign-fixed so the
    largest-magnitude entry of each column is positive.
    """

    xbar: np.ndarray  # T x p
    eigvals: np.ndarray  # length p, descending, >= 0
    eigvecs: np.ndarray  # p x min(p, T)

    @property
    def sigma_hat(self) -> np.ndarray:
        return self.xbar.T @ self.xbar / self.xbar.shape[0]


def cross_sectional_means(X: np.ndarray) -> np.ndarray:
    """Average the n x T x p regressor array over units: returns T x p."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise DataError(f"expected n x T x p array, got shape {X.shape}")
    return X.mean(axis=0)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (ties break
    at the lowest index, which argmax already does)."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def spectral_summary(xbar: np.ndarray) -> SpectralSummary:
    """Eigendecomposition of xbar' xbar / T via the SVD of xbar."""
    xbar = np.asarray(xbar, dtype=float)
    if xbar.ndim != 2:
        raise DataError(f"expected T x p matrix, got shape {xbar.shape}")
    if not np.all(np.isfinite(xbar)):
        raise DataError("non-finite entries in cross-sectional averages")
    T, p = xbar.shape
    _, s, vt = np.linalg.svd(xbar / np.sqrt(T), full_matrices=False)
    vals = s**2
    m = vals.size  # min(p, T)
    eigvals = np.zeros(p)
    eigvals[:m] = vals
    if eigvals[0] > 0:
        eigvals[eigvals < _EIG_CLAMP * eigvals[0]] = np.maximum(
            eigvals[eigvals < _EIG_CLAMP * eigvals[0]], 0.0
        )
    eigvecs = _fix_signs(vt.T)
    return SpectralSummary(xbar=xbar, eigvals=eigvals, eigvecs=eigvecs)


def khat_threshold(eigvals: np.ndarray, tau: float) -> int:
    """Number of eigenvalues >= tau (closed threshold)."""
    if tau <= 0:
        raise DataError("tau must be positive")
    return int(np.count_nonzero(np.asarray(eigvals) >= tau))


def default_tau(eigvals: np.ndarray, alpha: float) -> float:
    """Rule-of-thumb threshold alpha * (largest eigenvalue)."""
    if not 0 < alpha <= 1:
        raise DataError("alpha must lie in (0, 1]")
    lam1 = float(np.asarray(eigvals)[0])
    if lam1 <= 0:
        raise DataError("all-zero spectrum: cannot form a threshold")
    return alpha * lam1


def ktilde_ratio(eigvals: np.ndarray, alpha: float) -> int:
    """Smallest k whose cumulative eigenvalue share reaches 1 - alpha."""
    ev = np.asarray(eigvals, dtype=float)
    total = ev.sum()
    if total <= 0:
        raise DataError("all-zero spectrum: shares undefined")
    cum = np.cumsum(ev) / total
    return int(np.argmax(cum >= 1.0 - alpha - _SHARE_TOL)) + 1
