"""Trotterized quantum imaginary-time evolution.

Each step approximates the normalized non-unitary update
``exp(-H dt)|psi> / c`` by a product of Pauli rotations
``prod_j exp(-i a_j dt u_j)``. The coefficients solve ``S a = b`` with

    S_jl = <psi| u_j u_l |psi>,
    b_j  = -i <psi| u_j H |psi> / sqrt(1 - dt <psi|H + H^dagger|psi>).

With odd-Y strings ``u_j = i K_j`` where ``K_j`` is a real signed
permutation, so for real states ``S`` and ``b`` are real and every rotation
keeps the state real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .dns import infidelity
from .errors import ConfigError, NumericalError, StepSizeError
from .pauli import PauliString, PauliSum, expectation, generator_tables, multiply, odd_y_strings, to_dense
from .problem import Problem, step_count
from .record import RunRecord
from .resources import count_pauli_rotation, count_run

IMAG_TOL = 1e-8


@dataclass(frozen=True)
class QitePool:
    """Odd-Y generators; ``domain`` is the largest qubit span allowed."""

    strings: tuple
    domain: int | None = None

    def __post_init__(self):
        strings = tuple(s if isinstance(s, PauliString) else PauliString(s) for s in self.strings)
        object.__setattr__(self, "strings", strings)
        if not strings:
            raise ConfigError("pool is empty")
        if len(set(strings)) != len(strings):
            raise ConfigError("pool contains duplicate strings")
        n = strings[0].n
        for s in strings:
            if s.n != n:
                raise ConfigError("pool strings act on different register sizes")
            if s.y_count % 2 == 0:
                raise ConfigError(f"{s} has even Y parity")

    @property
    def qubits(self) -> int:
        return self.strings[0].n

    def __len__(self) -> int:
        return len(self.strings)

    @classmethod
    def full(cls, n: int, domain: int | None = None) -> "QitePool":
        """Every odd-Y string whose support fits in ``domain`` adjacent qubits."""
        return cls(tuple(odd_y_strings(n, max_span=domain)), domain)

    def tables(self):
        return generator_tables(self.strings, self.qubits)


@dataclass
class QiteStepRecord:
    coefficients: np.ndarray
    norm_factor: float
    residual: float


def _as_matrix(h, n: int):
    if isinstance(h, PauliSum):
        return to_dense(h, n)
    return h


def _generator_states(psi: np.ndarray, tables) -> np.ndarray:
    """Rows ``K_j psi`` with ``K_j = -i u_j``."""
    src, sign = tables
    return sign * psi[src]


def build_s(psi: np.ndarray, pool: QitePool, tables=None) -> np.ndarray:
    """Gram matrix ``Re <u_j psi|u_l psi>``."""
    k = _generator_states(psi, tables or pool.tables())
    return np.real(np.conj(k) @ k.T)


def build_s_symbolic(psi: np.ndarray, pool: QitePool) -> np.ndarray:
    """Same matrix assembled from Pauli products and expectation values."""
    m = len(pool)
    s = np.empty((m, m))
    for j, uj in enumerate(pool.strings):
        for l, ul in enumerate(pool.strings):
            phase, prod = multiply(uj, ul)
            s[j, l] = np.real(phase * expectation(psi, PauliSum({prod: 1.0})))
    return s


def norm_radicand(psi: np.ndarray, h, dt: float, exact_norm: bool = False) -> float:
    """First-order (or exact) squared norm of ``exp(-H dt)|psi>``."""
    sym = h + h.conj().T
    if exact_norm:
        dense = sym.toarray() if sp.issparse(sym) else np.asarray(sym)
        return float(np.real(np.vdot(psi, scipy.linalg.expm(-dt * dense) @ psi)))
    return float(1.0 - dt * np.real(np.vdot(psi, sym @ psi)))


def build_b(psi: np.ndarray, pool: QitePool, h, dt: float, exact_norm: bool = False,
            tables=None) -> tuple[np.ndarray, float]:
    """Right-hand side ``b`` and the norm factor ``c = sqrt(radicand)``."""
    h = _as_matrix(h, pool.qubits)
    rad = norm_radicand(psi, h, dt, exact_norm)
    if rad <= 0:
        raise StepSizeError(f"norm radicand {rad:.3e} is not positive; reduce dt (now {dt})")
    c = float(np.sqrt(rad))
    u_psi = 1j * _generator_states(psi, tables or pool.tables())
    b = -1j * (np.conj(u_psi) @ (h @ psi)) / c
    if np.max(np.abs(b.imag), initial=0.0) > IMAG_TOL:
        raise NumericalError(f"b has imaginary part {np.abs(b.imag).max():.3e}; state left the real sector")
    return b.real, c


def apply_generators(psi: np.ndarray, angles: np.ndarray, tables) -> np.ndarray:
    """Apply ``exp(angle_j K_j)`` for each generator in order."""
    src, sign = tables
    for j, angle in enumerate(angles):
        if angle:
            psi = np.cos(angle) * psi + np.sin(angle) * sign[j] * psi[src[j]]
    return psi


def qite_step(psi: np.ndarray, pool: QitePool, h, dt: float, rcond: float = 1e-8,
              exact_norm: bool = False, tables=None) -> tuple[np.ndarray, QiteStepRecord]:
    """One Trotterized imaginary-time step of length ``dt``."""
    if dt == 0:
        return psi.copy(), QiteStepRecord(np.zeros(len(pool)), 1.0, 0.0)
    tables = tables or pool.tables()
    s = build_s(psi, pool, tables)
    b, c = build_b(psi, pool, h, dt, exact_norm, tables)
    a, *_ = np.linalg.lstsq(s, b, rcond=rcond)
    residual = float(np.linalg.norm(s @ a - b))
    # exp(-i a dt u) = exp(a dt K) because u = i K
    new = apply_generators(psi, a * dt, tables)
    return new, QiteStepRecord(a, c, residual)


@dataclass
class QiteConfig:
    rcond: float = 1e-8
    exact_norm: bool = False
    domain: int | None = None
    connectivity: str = "linear"


QITE_COLUMNS = ["step", "t", "infidelity", "c_k", "cum_norm", "a_max", "solve_residual", "gates"]


def qite_run(problem: Problem, pool: QitePool | None, dt: float, total: float,
             rcond: float = 1e-8, exact_norm: bool = False, connectivity: str = "linear") -> RunRecord:
    """Iterate :func:`qite_step` from the embedded initial state."""
    pool = pool or QitePool.full(problem.qubits)
    if pool.qubits != problem.qubits:
        raise ConfigError(f"pool acts on {pool.qubits} qubits, problem has {problem.qubits}")
    steps = step_count(dt, total)
    reference = problem.reference(steps, dt)
    h = problem.hamiltonian
    tables = pool.tables()
    gates_per_step = sum(count_pauli_rotation(s, connectivity).total for s in pool.strings)
    record = RunRecord(method="qite", columns=list(QITE_COLUMNS))
    psi = problem.initial.copy()
    cum = 1.0
    record.append(step=0, t=0.0, infidelity=infidelity(psi, reference[0][0]), c_k=1.0,
                  cum_norm=1.0, a_max=0.0, solve_residual=0.0, gates=0)
    for k in range(1, steps + 1):
        try:
            psi, info = qite_step(psi, pool, h, dt, rcond, exact_norm, tables)
        except NumericalError as exc:
            raise type(exc)(f"step {k}: {exc}") from exc
        cum *= info.norm_factor
        record.append(step=k, t=k * dt, infidelity=infidelity(psi, reference[k][0]),
                      c_k=info.norm_factor, cum_norm=cum,
                      a_max=float(np.max(np.abs(info.coefficients))),
                      solve_residual=info.residual, gates=k * gates_per_step)
    record.trace = [{"repeat": steps, "ops": [["rot", s.letters] for s in pool.strings]}] if steps else []
    record.resources = count_run(record.trace, connectivity)
    record.extras = {"pool_size": len(pool), "final_state": [float(v) for v in np.real(psi)]}
    return record
