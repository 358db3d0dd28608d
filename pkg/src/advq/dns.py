"""Classical reference solution of ``dC/dt = A C``."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ConfigError, DimensionError


def _dense(a) -> np.ndarray:
    return a.toarray() if sp.issparse(a) else np.asarray(a)


def _check(a, c0) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"operator must be square, got {a.shape}")
    if c0.shape != (a.shape[0],):
        raise DimensionError(f"vector of shape {c0.shape} does not match operator {a.shape}")


def evolve_expm(a, c0: np.ndarray, t: float) -> np.ndarray:
    """``exp(A t) c0`` by scaling and squaring."""
    c0 = np.asarray(c0)
    _check(a, c0)
    if t < 0:
        raise ConfigError(f"time must be non-negative, got {t}")
    if t == 0:
        return c0.copy()
    return scipy.linalg.expm(_dense(a) * t) @ c0


def evolve_rk4(a, c0: np.ndarray, t: float, substeps: int) -> np.ndarray:
    """Classic fourth-order Runge-Kutta with ``substeps`` equal steps."""
    c0 = np.asarray(c0)
    _check(a, c0)
    if substeps < 1:
        raise ConfigError(f"substeps must be at least 1, got {substeps}")
    h = t / substeps
    c = c0.astype(np.result_type(c0, a.dtype, float))
    for _ in range(substeps):
        k1 = a @ c
        k2 = a @ (c + 0.5 * h * k1)
        k3 = a @ (c + 0.5 * h * k2)
        k4 = a @ (c + h * k3)
        c = c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return c


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|**2`` for normalized states, clipped into ``[0, 1]``."""
    if a.shape != b.shape:
        raise DimensionError(f"state shapes differ: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def infidelity(a: np.ndarray, b: np.ndarray) -> float:
    return max(0.0, 1.0 - fidelity(a, b))


def reference_series(a, c0: np.ndarray, times) -> list[tuple[np.ndarray, float]]:
    """Normalized ``exp(A t) c0`` and its norm for each requested time."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly increasing")
    dense = _dense(a)
    out = []
    for t in times:
        c = evolve_expm(dense, c0, float(t))
        norm = float(np.linalg.norm(c))
        out.append((c / norm, norm))
    return out
