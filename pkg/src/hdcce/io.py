"""Stable file formats.

All CSVs use '.' decimals, ',' separators, LF line endings and 17
significant digits for floats (lossless float64 round trip).  x.csv is long
format with 1-based unit/time/column indices.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_lines(path, lines) -> None:
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_y_csv(path, Y: np.ndarray) -> None:
    _write_lines(path, [",".join(fmt(v) for v in row) for row in np.asarray(Y, dtype=float)])


def read_y_csv(path) -> np.ndarray:
    try:
        Y = np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    bad = np.argwhere(~np.isfinite(Y))
    if bad.size:
        u, t = bad[0]
        raise DataError(f"non-finite response at (unit={u + 1}, time={t + 1})")
    return Y


def write_x_csv(path, X: np.ndarray) -> None:
    X = np.asarray(X, dtype=float)
    n, T, p = X.shape
    lines = ["unit,time,j,value"]
    for i in range(n):
        for t in range(T):
            row = X[i, t]
            lines.extend(f"{i + 1},{t + 1},{j + 1},{fmt(row[j])}" for j in range(p))
    _write_lines(path, lines)


def read_x_csv(path) -> np.ndarray:
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except Exception as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    if raw.shape[1] != 4:
        raise DataError(f"{path}: expected 4 columns unit,time,j,value")
    units = raw[:, 0].astype(int)
    times = raw[:, 1].astype(int)
    cols = raw[:, 2].astype(int)
    vals = raw[:, 3]
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        k = bad[0]
        raise DataError(
            f"non-finite regressor at (unit={units[k]}, time={times[k]}, j={cols[k]})"
        )
    n, T, p = units.max(), times.max(), cols.max()
    if units.min() < 1 or times.min() < 1 or cols.min() < 1:
        raise DataError(f"{path}: unit/time/j indices must be 1-based positive")
    X = np.full((n, T, p), np.nan)
    X[units - 1, times - 1, cols - 1] = vals
    missing = np.argwhere(np.isnan(X))
    if missing.size:
        i, t, j = missing[0]
        raise DataError(f"missing regressor cell (unit={i + 1}, time={t + 1}, j={j + 1})")
    return X


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_beta_csv(path, beta: np.ndarray) -> None:
    lines = ["j,beta_hat"]
    lines.extend(f"{j + 1},{fmt(v)}" for j, v in enumerate(np.asarray(beta, dtype=float)))
    _write_lines(path, lines)


def write_deviations_csv(path, report) -> None:
    lines = ["run,estimator,j,delta"]
    for rec in report.records:
        if rec.excluded:
            continue
        for j in report.rep_coords:
            delta = rec.beta_at[j] - report.true_beta[j - 1]
            lines.append(f"{rec.run},{rec.estimator},{j},{fmt(delta)}")
    _write_lines(path, lines)


def write_summary_csv(path, rows) -> None:
    header = [
        "estimator", "coordinate", "q05", "q25", "median", "q75", "q95",
        "mean", "share_exact_zero", "n_runs", "n_excluded",
    ]
    lines = [",".join(header)]
    lines.extend(",".join(fmt(row[k]) for k in header) for row in rows)
    _write_lines(path, lines)


def write_run_diagnostics_csv(path, report) -> None:
    lines = ["run,estimator,k_used,converged,degenerate,failed,kkt_violation"]
    lines.extend(
        f"{r.run},{r.estimator},{r.k_used},{int(r.converged)},{int(r.degenerate)},"
        f"{int(r.failed)},{fmt(r.kkt_violation)}"
        for r in report.records
    )
    _write_lines(path, lines)


def write_metric_csv(path, metrics: dict) -> None:
    lines = ["metric,value"]
    lines.extend(f"{k},{fmt(v)}" for k, v in metrics.items())
    _write_lines(path, lines)
