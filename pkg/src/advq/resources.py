"""Native-gate resource estimates over the set {X, SX, RZ, CZ}.

Rule table (all gates act on a chain ``0 - 1 - ... - n-1``):

==================  ==========================================================
circuit element     native sequence
==================  ==========================================================
H                   RZ(pi/2) SX RZ(pi/2)
CX(c, t)            H(t) CZ(c, t) H(t)
SWAP(a, b)          CX(a, b) CX(b, a) CX(a, b)
RY(theta)           SX RZ(theta + pi) SX RZ(3 pi)
exp(-i theta P)     basis change on each support qubit (X: H, Y: SX), CX ladder
                    between consecutive support qubits towards the last one,
                    RZ(2 theta) on the last, reverse ladder, undo basis change
                    (X: H, Y: X SX)
==================  ==========================================================

On the linear chain a CX between qubits ``d > 1`` apart is routed by moving
the control next to the target with ``d - 1`` SWAPs and undoing them after.
No gate cancellation is attempted across elements.

A circuit trace is a list of elements ``["rot", letters]``, ``["ry", q]``,
``["cx", c, t]`` or ``{"repeat": k, "ops": [...]}``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .pauli import PauliString

NATIVE = ("x", "sx", "rz", "cz")
CONNECTIVITIES = ("linear", "all-to-all")


@dataclass
class ResourceCount:
    counts: dict = field(default_factory=lambda: {k: 0 for k in NATIVE})
    depth: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def two_qubit_count(self) -> int:
        return self.counts["cz"]

    def to_dict(self) -> dict:
        return {
            "counts": {k: int(self.counts[k]) for k in NATIVE},
            "total": int(self.total),
            "depth": int(self.depth),
            "two_qubit_count": int(self.two_qubit_count),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResourceCount":
        return cls(counts={k: int(data["counts"][k]) for k in NATIVE}, depth=int(data["depth"]))


def _h(q):
    return [("rz", (q,), np.pi / 2), ("sx", (q,), None), ("rz", (q,), np.pi / 2)]


def _cx_adjacent(c, t):
    return _h(t) + [("cz", (c, t), None)] + _h(t)


def _swap(a, b):
    return _cx_adjacent(a, b) + _cx_adjacent(b, a) + _cx_adjacent(a, b)


def _cx(c, t, connectivity):
    if connectivity == "all-to-all" or abs(c - t) == 1:
        return _cx_adjacent(c, t)
    step = 1 if t > c else -1
    path = list(range(c, t, step))  # control walks to t - step
    swaps = [_swap(a, a + step) for a in path[:-1]]
    out = [g for s in swaps for g in s] + _cx_adjacent(path[-1], t)
    return out + [g for s in reversed(swaps) for g in s]


def _check_connectivity(connectivity: str) -> None:
    if connectivity not in CONNECTIVITIES:
        raise ConfigError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity!r}")


@functools.lru_cache(maxsize=None)
def rotation_gates(letters: str, theta: float = 0.0, connectivity: str = "linear") -> tuple:
    """Native gate list ``(kind, qubits, angle)`` for ``exp(-i theta P)``."""
    _check_connectivity(connectivity)
    p = PauliString(letters)
    if p.is_identity():
        raise ConfigError("identity rotation has no gate decomposition")
    support = p.support
    gates = []
    for q in support:
        if letters[q] == "X":
            gates += _h(q)
        elif letters[q] == "Y":
            gates.append(("sx", (q,), None))
    ladder = []
    for a, b in zip(support, support[1:]):
        ladder += _cx(a, b, connectivity)
    gates += ladder
    gates.append(("rz", (support[-1],), 2 * theta))
    gates += _reverse_ladder(support, connectivity)
    for q in support:
        if letters[q] == "X":
            gates += _h(q)
        elif letters[q] == "Y":
            gates += [("x", (q,), None), ("sx", (q,), None)]
    return tuple(gates)


def _reverse_ladder(support, connectivity):
    gates = []
    for a, b in reversed(list(zip(support, support[1:]))):
        gates += _cx(a, b, connectivity)
    return gates


def ry_gates(q: int, theta: float = 0.0) -> tuple:
    return (("sx", (q,), None), ("rz", (q,), theta + np.pi), ("sx", (q,), None), ("rz", (q,), 3 * np.pi))


def cx_gates(c: int, t: int, connectivity: str = "linear") -> tuple:
    _check_connectivity(connectivity)
    return tuple(_cx(c, t, connectivity))


def count_gates(gates, n: int | None = None) -> ResourceCount:
    """Per-kind counts and as-soon-as-possible depth of a native gate list."""
    counts = {k: 0 for k in NATIVE}
    frontier: dict[int, int] = {}
    depth = 0
    for kind, qubits, _ in gates:
        counts[kind] += 1
        layer = max(frontier.get(q, 0) for q in qubits) + 1
        for q in qubits:
            frontier[q] = layer
        depth = max(depth, layer)
    return ResourceCount(counts=counts, depth=depth)


def count_pauli_rotation(p, connectivity: str = "linear") -> ResourceCount:
    letters = p.letters if isinstance(p, PauliString) else str(p)
    return count_gates(rotation_gates(letters, 0.0, connectivity))


def _element_gates(op, connectivity):
    kind = op[0]
    if kind == "rot":
        return rotation_gates(op[1], 0.0, connectivity)
    if kind == "ry":
        return ry_gates(int(op[1]))
    if kind == "cx":
        return cx_gates(int(op[1]), int(op[2]), connectivity)
    raise ConfigError(f"unknown trace element {op!r}")


def _iter_elements(trace):
    for op in trace:
        if isinstance(op, dict):
            for _ in range(int(op["repeat"])):
                yield from _iter_elements(op["ops"])
        else:
            yield op


def count_run(trace, connectivity: str = "linear") -> ResourceCount:
    """Aggregate native counts and depth over a circuit trace."""
    _check_connectivity(connectivity)
    counts = {k: 0 for k in NATIVE}
    frontier: dict[int, int] = {}
    depth = 0
    for op in _iter_elements(trace):
        for kind, qubits, _ in _element_gates(op, connectivity):
            counts[kind] += 1
            layer = max(frontier.get(q, 0) for q in qubits) + 1
            for q in qubits:
                frontier[q] = layer
            if layer > depth:
                depth = layer
    return ResourceCount(counts=counts, depth=depth)


def structural_depth(trace) -> int:
    """Depth counting each trace element as a single layer on its qubits."""
    frontier: dict[int, int] = {}
    depth = 0
    for op in _iter_elements(trace):
        if op[0] == "rot":
            qubits = PauliString(op[1]).support
        else:
            qubits = tuple(int(q) for q in op[1:])
        layer = max(frontier.get(q, 0) for q in qubits) + 1
        for q in qubits:
            frontier[q] = layer
        depth = max(depth, layer)
    return depth


_NATIVE_MATRIX = {
    "x": lambda a: np.array([[0, 1], [1, 0]], dtype=complex),
    "sx": lambda a: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "rz": lambda a: np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)]),
}


def gates_unitary(gates, n: int) -> np.ndarray:
    """Dense unitary of a native gate list (qubit 0 most significant)."""
    dim = 1 << n
    u = np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    for kind, qubits, angle in gates:
        if kind == "cz":
            a, b = qubits
            both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            u = (1 - 2 * both)[:, None] * u
            continue
        single = _NATIVE_MATRIX[kind](angle)
        op = np.kron(np.kron(np.eye(1 << qubits[0]), single), np.eye(1 << (n - 1 - qubits[0])))
        u = op @ u
    return u
