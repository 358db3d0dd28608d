"""Pauli strings, Pauli sums and their action on statevectors.

Qubit 0 is the leftmost tensor factor and acts on the most significant bit
of the basis index, so ``"XI"`` applied to ``|00>`` moves amplitude from
index 0 to index 2.

A statevector is a plain 1-D numpy array of length ``2**n``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DimensionError, ResourceError

LETTERS = "IXYZ"
DEDUP_TOL = 1e-14
DENSE_MAX_QUBITS = 12

# single-qubit products: (a, b) -> (phase, letter) with a*b = phase*letter
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

def _signs(bits: np.ndarray) -> np.ndarray:
    """``(-1)**popcount(bits)`` as signed integers."""
    return 1 - 2 * (np.bitwise_count(bits) & 1).astype(np.int64)


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis, written left to right."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(ch not in LETTERS for ch in self.letters):
            raise ConfigError(f"invalid Pauli string {self.letters!r}")

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def n(self) -> int:
        return len(self.letters)

    @functools.cached_property
    def x_mask(self) -> int:
        """Bits flipped by the string (X or Y factors)."""
        mask = 0
        for ch in self.letters:
            mask = (mask << 1) | (ch in "XY")
        return mask

    @functools.cached_property
    def z_mask(self) -> int:
        """Bits that pick up a sign (Z or Y factors)."""
        mask = 0
        for ch in self.letters:
            mask = (mask << 1) | (ch in "YZ")
        return mask

    @property
    def y_count(self) -> int:
        return self.letters.count("Y")

    @property
    def weight(self) -> int:
        return sum(ch != "I" for ch in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, ch in enumerate(self.letters) if ch != "I")

    def is_identity(self) -> bool:
        return self.weight == 0

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)


def _as_string(p) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(str(p))


def multiply(a, b) -> tuple[complex, PauliString]:
    """Return ``(phase, product)`` with ``a @ b == phase * product``."""
    a, b = _as_string(a), _as_string(b)
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    phase = 1 + 0j
    out = []
    for la, lb in zip(a.letters, b.letters):
        ph, letter = _PRODUCT[(la, lb)]
        phase *= ph
        out.append(letter)
    return phase, PauliString("".join(out))


def y_parity(p) -> str:
    """``"odd"`` or ``"even"`` according to the number of Y factors."""
    return "odd" if _as_string(p).y_count % 2 else "even"


class PauliSum:
    """Linear combination of Pauli strings with complex coefficients.

    Terms with magnitude below ``DEDUP_TOL`` are dropped on construction.
    Insertion order is preserved so that reductions are deterministic.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms: Mapping | Iterable = (), n: int | None = None):
        acc: dict[PauliString, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coeff in items:
            p = _as_string(key)
            if n is None:
                n = p.n
            elif p.n != n:
                raise DimensionError(f"term {p} does not act on {n} qubits")
            acc[p] = acc.get(p, 0j) + complex(coeff)
        self._terms = {p: c for p, c in acc.items() if abs(c) >= DEDUP_TOL}
        self._n = n

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    @property
    def n(self) -> int | None:
        return self._n

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __getitem__(self, key) -> complex:
        return self._terms.get(_as_string(key), 0j)

    def __contains__(self, key) -> bool:
        return _as_string(key) in self._terms

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {c:.6g}" for p, c in self._terms.items())
        return f"PauliSum({{{body}}})"

    def _check(self, other: "PauliSum") -> int | None:
        if self._n is not None and other._n is not None and self._n != other._n:
            raise DimensionError(f"register mismatch: {self._n} vs {other._n}")
        return self._n if self._n is not None else other._n

    def __add__(self, other: "PauliSum") -> "PauliSum":
        n = self._check(other)
        return PauliSum(list(self._terms.items()) + list(other._terms.items()), n=n)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1) * other

    def __neg__(self) -> "PauliSum":
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            n = self._check(other)
            out = []
            for pa, ca in self._terms.items():
                for pb, cb in other._terms.items():
                    phase, prod = multiply(pa, pb)
                    out.append((prod, phase * ca * cb))
            return PauliSum(out, n=n)
        scale = complex(other)
        return PauliSum([(p, scale * c) for p, c in self._terms.items()], n=self._n)

    __rmul__ = __mul__

    def tensor(self, other: "PauliSum") -> "PauliSum":
        """Kronecker product with ``self`` on the more significant qubits."""
        out = []
        for pa, ca in self._terms.items():
            for pb, cb in other._terms.items():
                out.append((PauliString(pa.letters + pb.letters), ca * cb))
        n = None if self._n is None or other._n is None else self._n + other._n
        return PauliSum(out, n=n)

    def dagger(self) -> "PauliSum":
        return PauliSum([(p, c.conjugate()) for p, c in self._terms.items()], n=self._n)

    def to_json(self) -> list[dict]:
        return [{"string": p.letters, "re": c.real, "im": c.imag} for p, c in self._terms.items()]

    @classmethod
    def from_json(cls, items: list[dict]) -> "PauliSum":
        return cls([(d["string"], complex(d["re"], d["im"])) for d in items])

    @classmethod
    def single(cls, letters: str, coeff: complex = 1.0) -> "PauliSum":
        return cls({letters: coeff})


def to_dense(op: PauliSum, n: int) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli sum."""
    if n > DENSE_MAX_QUBITS:
        raise ResourceError(f"dense conversion limited to {DENSE_MAX_QUBITS} qubits, got {n}")
    if op.n is not None and op.n != n:
        raise DimensionError(f"sum acts on {op.n} qubits, requested {n}")
    dim = 1 << n
    idx = np.arange(dim)
    mat = np.zeros((dim, dim), dtype=complex)
    for p, c in op:
        # P|i> = i^nY (-1)^popcount(i & z) |i ^ x>
        phase = (1j ** (p.y_count % 4)) * _signs(idx & p.z_mask)
        mat[idx ^ p.x_mask, idx] += c * phase
    return mat


def _check_state(psi: np.ndarray, n: int) -> None:
    if psi.ndim != 1 or psi.shape[0] != (1 << n):
        raise DimensionError(f"state of length {psi.shape[0]} does not match {n} qubits")


def qubit_count(psi: np.ndarray) -> int:
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DimensionError(f"state length {dim} is not a power of two")
    return n


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ConfigError("cannot normalize the zero vector")
    return psi / norm


def apply_string(psi: np.ndarray, p) -> np.ndarray:
    """Return ``P|psi>`` using bit-flip and sign masks."""
    p = _as_string(p)
    _check_state(psi, p.n)
    idx = np.arange(psi.shape[0])
    src = idx ^ p.x_mask
    sign = _signs(src & p.z_mask)
    return (1j ** (p.y_count % 4)) * sign * psi[src]


def apply_rotation(psi: np.ndarray, p, theta: float) -> np.ndarray:
    """Return ``exp(-i theta P)|psi>``; identity strings are rejected."""
    p = _as_string(p)
    if p.is_identity():
        raise ConfigError("identity rotation is a global phase; filter it from the pool")
    _check_state(psi, p.n)
    if y_parity(p) == "odd" and np.isrealobj(psi):
        src, sign = real_generator(p)
        return np.cos(theta) * psi + np.sin(theta) * sign * psi[src]
    return np.cos(theta) * psi - 1j * np.sin(theta) * apply_string(psi, p)


def expectation(psi: np.ndarray, op: PauliSum) -> complex:
    """``sum_P c_P <psi|P|psi>`` accumulated in term insertion order."""
    total = 0j
    for p, c in op:
        total += c * np.vdot(psi, apply_string(psi, p))
    return total


def real_generator(p) -> tuple[np.ndarray, np.ndarray]:
    """Signed-permutation form of ``-i P`` for an odd-Y string.

    Returns ``(src, sign)`` such that ``(-i P) psi == sign * psi[src]``.
    The matrix is real and antisymmetric, so ``exp(-i theta P)`` maps real
    states to real states.
    """
    p = _as_string(p)
    if p.y_count % 2 == 0:
        raise ConfigError(f"{p} has even Y parity; -iP is not real")
    idx = np.arange(1 << p.n)
    src = idx ^ p.x_mask
    base = (-1j * 1j ** (p.y_count % 4)).real
    sign = base * _signs(src & p.z_mask)
    return src, sign.astype(float)


def generator_tables(strings: Iterable, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack :func:`real_generator` tables for a list of odd-Y strings.

    ``src`` has shape ``(m, 2**n)`` and ``sign`` the same shape, so that
    ``sign * psi[src]`` gives every ``-i P_j psi`` at once.
    """
    strings = [_as_string(s) for s in strings]
    dim = 1 << n
    dtype = np.int16 if dim <= 1 << 15 else np.int32
    src = np.empty((len(strings), dim), dtype=dtype)
    sign = np.empty((len(strings), dim), dtype=np.int8)
    for row, s in enumerate(strings):
        if s.n != n:
            raise DimensionError(f"{s} does not act on {n} qubits")
        a, b = real_generator(s)
        src[row] = a
        sign[row] = b
    return src, sign


def odd_y_strings(n: int, max_weight: int | None = None, contiguous: bool = False,
                  max_span: int | None = None) -> list[PauliString]:
    """All odd-Y strings on ``n`` qubits in lexicographic order.

    ``max_weight`` limits the number of non-identity factors, ``contiguous``
    keeps only strings whose support is an unbroken block of qubits and
    ``max_span`` limits the distance from first to last support qubit.
    """
    max_weight = n if max_weight is None else max_weight
    max_span = n if max_span is None else max_span
    out = []
    for letters in itertools.product(LETTERS, repeat=n):
        if letters.count("Y") % 2 == 0:
            continue
        support = [q for q, ch in enumerate(letters) if ch != "I"]
        weight = len(support)
        span = support[-1] - support[0] + 1
        if weight > max_weight or span > max_span:
            continue
        if contiguous and span != weight:
            continue
        out.append(PauliString("".join(letters)))
    return out
