"""McLachlan linear system and distance shared by the variational methods.

For a normalized state ``C(theta)`` with derivative states ``d_j`` and
``H = H1 + i H2``, the squared distance

    D^2 = || sum_j thetadot_j P d_j + w ||^2,
    w   = (H1 - <H1>) C + i (H2 - <H2>) C,
    P   = 1 - |C><C|,

is minimized by ``A thetadot = R`` with

    A_jk = Re <d_j|d_k> - Re <d_j|C><C|d_k>,
    R_j  = -Re <d_j|w>.

Projecting out ``C`` removes the global-phase direction, so for real states
and real generators the second term of ``A`` vanishes. Expanding the norm
gives ``D^2 = thetadot A thetadot - 2 thetadot R + ||w||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError

HERMITIAN_TOL = 1e-10


@dataclass
class McLachlanSystem:
    a: np.ndarray
    r: np.ndarray
    h1_mean: float
    h2_mean: float
    variance: float  # ||w||^2
    residual_vector: np.ndarray  # w


def _check_hermitian(op, name: str) -> None:
    diff = op - op.conj().T
    size = abs(diff).max() if sp.issparse(diff) else np.max(np.abs(diff), initial=0.0)
    if size > HERMITIAN_TOL:
        raise NumericalError(f"{name} is not Hermitian (max deviation {size:.3e})")


def mclachlan_system(derivs: np.ndarray, state: np.ndarray, h1, h2, check: bool = True) -> McLachlanSystem:
    """Assemble ``A`` and ``R`` for derivative rows ``derivs``."""
    if check:
        _check_hermitian(h1, "H1")
        _check_hermitian(h2, "H2")
    h1c = h1 @ state
    h2c = h2 @ state
    e1 = float(np.real(np.vdot(state, h1c)))
    e2 = float(np.real(np.vdot(state, h2c)))
    w = (h1c - e1 * state) + 1j * (h2c - e2 * state)
    if np.isrealobj(derivs) and np.isrealobj(state) and np.max(np.abs(w.imag), initial=0.0) == 0.0:
        w = w.real
    overlap = np.conj(derivs) @ state  # <d_j|C>
    a = np.real(np.conj(derivs) @ derivs.T) - np.real(np.outer(overlap, np.conj(overlap)))
    r = -np.real(np.conj(derivs) @ w)
    return McLachlanSystem(a=0.5 * (a + a.T), r=r, h1_mean=e1, h2_mean=e2,
                           variance=float(np.real(np.vdot(w, w))), residual_vector=w)


def mclachlan_distance(state: np.ndarray, derivs: np.ndarray, thetadot: np.ndarray, h1, h2) -> float:
    """Norm of the explicit residual vector for the given parameter velocity."""
    h1c = h1 @ state
    h2c = h2 @ state
    e1 = np.real(np.vdot(state, h1c))
    e2 = np.real(np.vdot(state, h2c))
    w = (h1c - e1 * state) + 1j * (h2c - e2 * state)
    if len(thetadot):
        move = thetadot @ derivs
        move = move - np.vdot(state, move) * state
    else:
        move = 0.0
    return float(np.linalg.norm(move + w))


def quadratic_distance(system: McLachlanSystem, thetadot: np.ndarray) -> float:
    """``sqrt(thetadot A thetadot - 2 thetadot R + ||w||^2)`` clipped at zero."""
    value = thetadot @ system.a @ thetadot - 2 * thetadot @ system.r + system.variance
    return float(np.sqrt(max(value, 0.0)))


def solve_lstsq(system: McLachlanSystem, rcond: float = 1e-8) -> tuple[np.ndarray, float]:
    """Truncated-SVD least squares for ``A thetadot = R``; returns the residual too."""
    if system.a.size == 0:
        return np.zeros(0), 0.0
    x, *_ = np.linalg.lstsq(system.a, system.r, rcond=rcond)
    return x, float(np.linalg.norm(system.a @ x - system.r))
