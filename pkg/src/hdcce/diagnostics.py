"""Sampled surrogates for the theoretical design conditions.

None of these certify anything: the restricted-eigenvalue probe samples
random cone directions and therefore only upper-bounds the true constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .projection import ProjectionMatrix
from .spectral import SpectralSummary


@dataclass
class REEstimate:
    """Sampled restricted-eigenvalue diagnostic over the cone
    3*||b_I||_1 >= ||b_{I^c}||_1.  phi_lower is the smallest sampled phi; it
    is an upper bound on the true RE constant, not a certificate."""

    index_set: np.ndarray
    phi_lower: float
    samples: int


def re_condition_sample(
    design: np.ndarray, I, samples: int, seed: int = 0
) -> REEstimate:
    A = np.asarray(design, dtype=float)
    if A.ndim != 2:
        raise ConfigError(f"design must be a matrix, got shape {A.shape}")
    nT, p = A.shape
    I = np.unique(np.asarray(I, dtype=int))
    if I.size == 0:
        raise ConfigError("index set I is empty")
    if I.min() < 0 or I.max() >= p:
        raise ConfigError("index set I out of range")
    if samples < 1:
        raise ConfigError("samples must be positive")
    Ic = np.setdiff1d(np.arange(p), I)

    rng = np.random.default_rng(seed)
    bI = rng.standard_normal((I.size, samples))
    l1I = np.abs(bI).sum(axis=0)
    B = np.zeros((p, samples))
    B[I] = bI
    if Ic.size:
        V = rng.standard_normal((Ic.size, samples))
        u = rng.uniform(size=samples)
        scale = 3.0 * u * l1I / np.abs(V).sum(axis=0)
        B[Ic] = V * scale
    AB = A @ B
    phi = np.sqrt((AB**2).sum(axis=0) / nT * I.size) / l1I
    return REEstimate(index_set=I, phi_lower=float(phi.min()), samples=samples)


def projection_quality(proj: ProjectionMatrix, F: np.ndarray) -> dict:
    """How completely the projection annihilates the factor columns, plus
    the symmetry and idempotency errors of the matrix itself."""
    P = proj.mat
    F = np.asarray(F, dtype=float)
    if F.shape[0] != P.shape[0]:
        raise ConfigError(f"F has {F.shape[0]} rows but projection is {P.shape[0]}x{P.shape[0]}")
    fn = np.linalg.norm(F)
    return {
        "ratio": float(np.linalg.norm(P @ F) / fn) if fn > 0 else 0.0,
        "sym_err": float(np.abs(P - P.T).max()),
        "idem_err": float(np.abs(P @ P - P).max()),
    }


def eigen_spike_report(spectral: SpectralSummary, k: int) -> dict:
    """Head eigenvalues, the spike gap lambda_k / lambda_{k+1} (inf when the
    tail is exactly zero), and lambda_k / p."""
    ev = spectral.eigvals
    p = ev.size
    if not 1 <= k < p:
        raise ConfigError(f"need 1 <= k < p, got k={k}, p={p}")
    tail = ev[k]
    gap = float("inf") if tail == 0 else float(ev[k - 1] / tail)
    return {
        "head": ev[:k].tolist(),
        "gap_ratio": gap,
        "head_over_p": float(ev[k - 1] / p),
    }
