import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advq.errors import ConfigError, ResourceError
from advq.hamiltonian import (
    Transport1DConfig,
    decompose_dense,
    hamiltonian_1d,
    hermitian_split,
    operator_matrix_1d,
    shift_components,
    shift_matrix,
    shift_pauli,
    term_count_formula,
)
from advq.pauli import PauliSum, to_dense


def test_shift_matrix_small_cases():
    np.testing.assert_array_equal(shift_matrix(1), [[0, 1], [1, 0]])
    t2 = shift_matrix(2)
    np.testing.assert_array_equal(np.linalg.matrix_power(t2, 4), np.eye(4))
    np.testing.assert_array_equal(t2.T @ t2, np.eye(4))
    # the transpose moves e_i to e_{i+1}
    e0 = np.eye(4)[0]
    np.testing.assert_array_equal(t2.T @ e0, np.eye(4)[1])


def test_shift_three_qubits_matches_written_matrix():
    written = np.array([
        [0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],
        [1, 0, 0, 0, 0, 0, 0, 0],
    ])
    np.testing.assert_array_equal(to_dense(shift_pauli(3), 3), written)


def test_shift_two_qubit_expansion():
    op = shift_pauli(2)
    assert op.terms == {
        k: v for k, v in PauliSum({"IX": 0.5, "IY": 0.5j, "XX": 0.5, "XY": -0.5j}).terms.items()
    }
    np.testing.assert_array_equal(to_dense(op, 2), shift_matrix(2))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_shift_pauli_exact(n):
    np.testing.assert_array_equal(to_dense(shift_pauli(n), n), shift_matrix(n))
    np.testing.assert_array_equal(to_dense(shift_pauli(n, adjoint=True), n), shift_matrix(n).T)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_component_counts(n):
    counts = [len(part) for _, part in shift_components(n)]
    assert counts == [2] + [2 ** (j + 1) for j in range(1, n - 1)] + [2 ** (n - 1)]
    # the adjoint components reuse the same strings
    for (_, a), (_, b) in zip(shift_components(n), shift_components(n, adjoint=True)):
        assert set(a.terms) == set(b.terms)


def test_term_count_formula_values():
    assert term_count_formula(2) == 5
    assert term_count_formula(4) == 23
    with pytest.raises(ConfigError):
        term_count_formula(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_measured_term_count_generic_peclet(n):
    assert len(hamiltonian_1d(Transport1DConfig(n, 10.0))) == term_count_formula(n)


def test_headline_parameters_zero_superdiagonal():
    cfg = Transport1DConfig(4, 32.0)
    a = operator_matrix_1d(cfg)
    assert a[0, 1] == 0.0
    assert a[1, 0] == pytest.approx((16 + 16) / 2)
    # T and its adjoint expand onto the same strings, so a vanishing
    # superdiagonal leaves every string with a nonzero coefficient
    assert len(hamiltonian_1d(cfg)) == 23
    np.testing.assert_allclose(to_dense(hamiltonian_1d(cfg), 4), -a, atol=1e-12)


def test_row_sums_vanish():
    for n, pe in [(2, 1.0), (4, 32.0), (6, 3.7)]:
        np.testing.assert_allclose(operator_matrix_1d(Transport1DConfig(n, pe)).sum(axis=1), 0, atol=1e-12)


def test_large_peclet_limit_is_central_advection():
    n = 4
    cfg = Transport1DConfig(n, 1e9)
    dx = cfg.dx
    central = (shift_matrix(n).T - shift_matrix(n)) / (2 * dx)
    np.testing.assert_allclose(operator_matrix_1d(cfg), central, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.floats(0.1, 200.0))
def test_pauli_route_matches_dense(n, pe):
    cfg = Transport1DConfig(n, pe)
    np.testing.assert_allclose(to_dense(hamiltonian_1d(cfg), n), -operator_matrix_1d(cfg), rtol=0, atol=1e-12)


def test_hermitian_split_separates_diffusion_and_advection():
    n, pe = 4, 10.0
    cfg = Transport1DConfig(n, pe)
    h1, h2 = hermitian_split(hamiltonian_1d(cfg))
    t = shift_matrix(n)
    dx = cfg.dx
    laplacian = (t + t.T - 2 * np.eye(2 ** n)) / dx ** 2
    np.testing.assert_allclose(to_dense(h1, n), -laplacian / pe, atol=1e-12)
    advection = -(t - t.T) / (2 * dx)  # central difference of -d/dx
    np.testing.assert_allclose(to_dense(h2, n), -advection / 1j, atol=1e-12)


def test_decompose_identity_and_shift():
    assert decompose_dense(np.eye(8), 3).terms == PauliSum({"III": 1.0}).terms
    got = decompose_dense(shift_matrix(3), 3)
    want = shift_pauli(3)
    assert set(got.terms) == set(want.terms)
    for p, c in want:
        assert got[p] == pytest.approx(c, abs=1e-14)


def test_decompose_round_trip(rng):
    m = rng.normal(size=(16, 16))
    np.testing.assert_allclose(to_dense(decompose_dense(m, 4), 4), m, atol=1e-12)


def test_decompose_size_guard():
    with pytest.raises(ResourceError):
        decompose_dense(np.eye(2 ** 9), 9)


def test_config_validation():
    with pytest.raises(ConfigError):
        Transport1DConfig(1, 1.0)
    with pytest.raises(ConfigError):
        Transport1DConfig(4, 0.0)
    assert Transport1DConfig(5, 1.0).dx * 2 ** 5 == 1.0
