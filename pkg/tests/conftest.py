import functools

import numpy as np
import pytest

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(letters):
    """Dense matrix of a Pauli string by explicit Kronecker products."""
    return functools.reduce(np.kron, [SINGLE[ch] for ch in letters])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
