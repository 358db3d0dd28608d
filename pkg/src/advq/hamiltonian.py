"""1D advection-diffusion operator and its Pauli decomposition.

The periodic unit interval is split into ``2**n`` cells of width
``dx = 2**-n``. The semi-discrete system is ``dC/dt = A C`` with the
circulant stencil

    A = (b I + c T + d T^dagger) / (Pe dx),
    b = -2/dx,  c = 1/dx - Pe/2,  d = 1/dx + Pe/2,

where ``T`` is the cyclic left shift. The Hamiltonian is ``H = -A``.
``T`` is expanded into Pauli strings through ladder operators
``a = (X + iY)/2`` and ``a^dagger = (X - iY)/2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ResourceError
from .pauli import DENSE_MAX_QUBITS, PauliString, PauliSum, _signs

HS_MAX_QUBITS = 8
HS_DROP_TOL = 1e-12

_LOWER = PauliSum({"X": 0.5, "Y": 0.5j})  # a: |1> -> |0>
_RAISE = PauliSum({"X": 0.5, "Y": -0.5j})  # a^dagger: |0> -> |1>


@dataclass(frozen=True)
class Transport1DConfig:
    qubits: int
    peclet: float

    def __post_init__(self):
        if int(self.qubits) != self.qubits or self.qubits < 2:
            raise ConfigError(f"need at least 2 qubits, got {self.qubits}")
        if not self.peclet > 0:
            raise ConfigError(f"Peclet number must be positive, got {self.peclet}")

    @property
    def points(self) -> int:
        return 1 << self.qubits

    @property
    def dx(self) -> float:
        return 2.0 ** -self.qubits

    def stencil(self) -> tuple[float, float, float]:
        """Diagonal, superdiagonal and subdiagonal coefficients before scaling."""
        inv = 1.0 / self.dx
        return -2.0 * inv, inv - self.peclet / 2, inv + self.peclet / 2

    @property
    def prefactor(self) -> float:
        return 1.0 / (self.peclet * self.dx)

    def grid(self) -> np.ndarray:
        return np.arange(self.points) * self.dx


def _check_size(n: int, low: int = 1) -> None:
    if n < low:
        raise ConfigError(f"register size must be at least {low}, got {n}")
    if n > DENSE_MAX_QUBITS:
        raise ResourceError(f"register size limited to {DENSE_MAX_QUBITS}, got {n}")


def shift_matrix(n: int) -> np.ndarray:
    """Cyclic left shift: ones on the superdiagonal and the bottom-left corner."""
    _check_size(n)
    dim = 1 << n
    mat = np.zeros((dim, dim))
    mat[np.arange(dim), (np.arange(dim) + 1) % dim] = 1.0
    return mat


def _power(op: PauliSum, k: int) -> PauliSum:
    out = None
    for _ in range(k):
        out = op if out is None else out.tensor(op)
    return out


def _identity(k: int) -> PauliSum:
    return PauliSum({"I" * k: 1.0})


def shift_components(n: int, adjoint: bool = False) -> list[tuple[str, PauliSum]]:
    """Additive components of the shift operator, most local first.

    The components are ``I..I a``, ``I..I a (a^dagger)^j`` for
    ``j = 1..n-2`` and ``X (a^dagger)^(n-1)``; with ``adjoint`` the roles of
    ``a`` and ``a^dagger`` swap. Their sum is the full shift.
    """
    _check_size(n, 2)
    low, high = (_RAISE, _LOWER) if adjoint else (_LOWER, _RAISE)
    parts = [("identity^(n-1) x lower", _identity(n - 1).tensor(low))]
    for j in range(1, n - 1):
        term = low.tensor(_power(high, j))
        if n - 1 - j:
            term = _identity(n - 1 - j).tensor(term)
        parts.append((f"identity^(n-1-{j}) x lower x raise^{j}", term))
    parts.append(("X x raise^(n-1)", PauliSum({"X": 1.0}).tensor(_power(high, n - 1))))
    return parts


def shift_pauli(n: int, adjoint: bool = False) -> PauliSum:
    """Pauli expansion of the cyclic shift (or its adjoint)."""
    total = PauliSum(n=n)
    for _, part in shift_components(n, adjoint):
        total = total + part
    return total


def operator_matrix_1d(cfg: Transport1DConfig) -> np.ndarray:
    """Dense circulant transport operator ``A``."""
    b, c, d = cfg.stencil()
    dim = cfg.points
    rows = np.arange(dim)
    mat = np.zeros((dim, dim))
    mat[rows, rows] += b
    mat[rows, (rows + 1) % dim] += c
    mat[rows, (rows - 1) % dim] += d
    return cfg.prefactor * mat


def hamiltonian_1d(cfg: Transport1DConfig) -> PauliSum:
    """Pauli decomposition of ``H = -A`` built from the shift expansion."""
    b, c, d = cfg.stencil()
    n = cfg.qubits
    scale = -cfg.prefactor
    op = PauliSum({"I" * n: scale * b})
    op = op + (scale * c) * shift_pauli(n) + (scale * d) * shift_pauli(n, adjoint=True)
    return op


def term_count_formula(n: int) -> int:
    if n < 2:
        raise ConfigError(f"need at least 2 qubits, got {n}")
    return 2 ** n + 2 ** (n - 1) - 1


def hermitian_split(op):
    """Return ``(H1, H2)`` with ``op = H1 + i H2`` and both parts Hermitian.

    Works for Pauli sums, dense arrays and scipy sparse matrices.
    """
    if isinstance(op, PauliSum):
        adj = op.dagger()
        return 0.5 * (op + adj), (-0.5j) * (op - adj)
    adj = op.conj().T
    return 0.5 * (op + adj), -0.5j * (op - adj)


def decompose_dense(matrix: np.ndarray, n: int) -> PauliSum:
    """Hilbert-Schmidt projection ``c_P = Tr(P^dagger M) / 2**n``."""
    if n > HS_MAX_QUBITS:
        raise ResourceError(f"decomposition limited to {HS_MAX_QUBITS} qubits, got {n}")
    matrix = np.asarray(matrix)
    dim = 1 << n
    if matrix.shape != (dim, dim):
        raise ConfigError(f"expected a {dim}x{dim} matrix, got {matrix.shape}")
    idx = np.arange(dim)
    terms = []
    for letters in itertools.product("IXYZ", repeat=n):
        p = PauliString("".join(letters))
        # Tr(P^dagger M) = sum_i conj(P[i^x, i]) M[i^x, i]
        phase = (1j ** (p.y_count % 4)) * _signs(idx & p.z_mask)
        coeff = np.sum(np.conj(phase) * matrix[idx ^ p.x_mask, idx]) / dim
        if abs(coeff) > HS_DROP_TOL:
            terms.append((p, coeff))
    return PauliSum(terms, n=n)
