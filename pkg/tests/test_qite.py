import numpy as np
import pytest
import scipy.linalg

from advq.errors import ConfigError, NumericalError, StepSizeError
from advq.hamiltonian import Transport1DConfig
from advq.pauli import PauliSum, odd_y_strings
from advq.problem import problem_1d
from advq.qite import QitePool, build_b, build_s, build_s_symbolic, qite_run, qite_step
from conftest import kron_string


@pytest.fixture(scope="module")
def headline():
    return problem_1d(Transport1DConfig(4, 32.0))


@pytest.fixture(scope="module")
def headline_run(headline):
    return qite_run(headline, None, 0.002, 1.0)


def _random_real_state(rng, n):
    psi = rng.normal(size=2 ** n)
    return psi / np.linalg.norm(psi)


def test_pool_validation():
    with pytest.raises(ConfigError):
        QitePool(("XX",))
    with pytest.raises(ConfigError):
        QitePool(("YI", "YI"))
    with pytest.raises(ConfigError):
        QitePool(())
    assert len(QitePool.full(4)) == 120
    assert all(s.y_count % 2 == 1 for s in QitePool.full(3).strings)


def test_s_unit_diagonal_and_psd(rng):
    pool = QitePool.full(3)
    s = build_s(_random_real_state(rng, 3), pool)
    np.testing.assert_allclose(np.diag(s), 1.0, atol=1e-14)
    np.testing.assert_allclose(s, s.T, atol=1e-14)
    assert np.linalg.eigvalsh(s).min() > -1e-10


def test_s_uniform_superposition_dense_oracle():
    psi = np.full(4, 0.5)
    pool = QitePool(("YI", "IY"))
    s = build_s(psi, pool)
    oracle = np.real(psi @ kron_string("YY") @ psi)
    assert s[0, 1] == pytest.approx(oracle, abs=1e-15)
    np.testing.assert_allclose(s, np.eye(2), atol=1e-15)


def test_s_gram_route_matches_pauli_products(rng):
    pool = QitePool.full(2)
    psi = _random_real_state(rng, 2)
    np.testing.assert_allclose(build_s(psi, pool), build_s_symbolic(psi, pool), atol=1e-13)


def test_b_identity_hamiltonian(rng):
    lam, dt = 0.7, 0.01
    psi = _random_real_state(rng, 2)
    pool = QitePool.full(2)
    b, c = build_b(psi, pool, PauliSum({"II": lam}), dt)
    assert c == pytest.approx(np.sqrt(1 - 2 * lam * dt))
    expected = [np.real(-1j * lam * (psi @ kron_string(s.letters) @ psi)) / c for s in pool.strings]
    np.testing.assert_allclose(b, expected, atol=1e-14)
    # <u_j> vanishes for a real state and an odd-Y string
    np.testing.assert_allclose(b, 0.0, atol=1e-14)


def test_ground_state_is_fixed_point(rng):
    m = rng.normal(size=(4, 4))
    h = m + m.T
    _, vecs = np.linalg.eigh(h)
    psi = vecs[:, 0]
    pool = QitePool.full(2)
    b, _ = build_b(psi, pool, h, 0.01)
    np.testing.assert_allclose(b, 0.0, atol=1e-12)
    new, info = qite_step(psi, pool, h, 0.01)
    np.testing.assert_allclose(info.coefficients, 0.0, atol=1e-12)
    assert abs(abs(new @ psi) - 1.0) < 1e-4


def test_b_finite_difference_oracle(headline):
    psi, a = headline.initial, headline.operator
    pool = QitePool.full(4)
    h = 1e-6
    moved = scipy.linalg.expm(a * h) @ psi
    velocity = (moved / np.linalg.norm(moved) - psi) / h
    src, sign = pool.tables()
    oracle = (sign * psi[src]) @ velocity
    b, _ = build_b(psi, pool, headline.hamiltonian, h)
    np.testing.assert_allclose(b, oracle, rtol=1e-4, atol=1e-4 * np.abs(oracle).max())


def test_b_rejects_large_step(headline):
    with pytest.raises(StepSizeError):
        build_b(headline.initial, QitePool.full(4), headline.hamiltonian, 10.0)


def test_hermitian_y_drive_leaves_real_sector():
    psi = np.array([0.6, 0.8])
    with pytest.raises(NumericalError):
        build_b(psi, QitePool(("Y",)), 0.5 * kron_string("Y"), 0.01)


def test_zero_step_is_identity(rng):
    psi = _random_real_state(rng, 3)
    new, info = qite_step(psi, QitePool.full(3), np.eye(8), 0.0)
    np.testing.assert_array_equal(new, psi)
    assert info.norm_factor == 1.0 and not info.coefficients.any()


def test_single_generator_matches_expm():
    alpha, psi = 0.8, np.array([0.6, 0.8])
    h = 1j * alpha * kron_string("Y")  # anti-Hermitian drive exp(-H t) = exp(-i alpha Y t)
    errors = []
    for dt in (0.02, 0.01):
        new, _ = qite_step(psi, QitePool(("Y",)), h, dt)
        target = scipy.linalg.expm(-h * dt) @ psi
        errors.append(np.linalg.norm(new - target / np.linalg.norm(target)))
    assert errors[0] < 4 * 0.02 ** 2 and errors[1] < 4 * 0.01 ** 2


def test_step_keeps_state_real_and_normalized(headline):
    pool = QitePool.full(4)
    psi = headline.initial
    for _ in range(20):
        psi, info = qite_step(psi, pool, headline.hamiltonian, 0.002)
        assert np.isrealobj(psi)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10
        assert info.norm_factor > 0


def test_s_psd_along_run(headline):
    pool = QitePool.full(4)
    psi = headline.initial
    for _ in range(10):
        assert np.linalg.eigvalsh(build_s(psi, pool)).min() >= -1e-10
        psi, _ = qite_step(psi, pool, headline.hamiltonian, 0.002)


def test_headline_run_stays_below_threshold(headline_run):
    inf = np.array(headline_run.column("infidelity"))
    t = np.array(headline_run.column("t"))
    assert inf.max() < 1e-3
    window = inf[t >= 0.1 - 1e-12]
    ratio = float(window.max() / window.min())
    assert ratio < 10, f"infidelity max/min over [0.1, 1] is {ratio:.2f}"


def test_cumulative_norm_tracks_dns(headline, headline_run):
    exact = headline.reference(500, 0.002)[-1][1]
    assert abs(headline_run.final["cum_norm"] / exact - 1) < 0.05


def test_gate_count_grows_linearly(headline_run):
    gates = np.array(headline_run.column("gates"))
    steps = np.array(headline_run.column("step"))
    assert gates[0] == 0
    np.testing.assert_array_equal(gates, steps * gates[1])
    assert headline_run.resources.total == gates[-1]


def test_zero_duration_run(headline):
    record = qite_run(headline, None, 0.002, 0.0)
    assert len(record.rows) == 1
    assert record.final["infidelity"] < 1e-12
    assert record.resources.total == 0


def test_convergence_order_three_qubits():
    problem = problem_1d(Transport1DConfig(3, 32.0))
    coarse = qite_run(problem, None, 0.002, 1.0).final["infidelity"]
    fine = qite_run(problem, None, 0.001, 1.0).final["infidelity"]
    ratio = coarse / fine
    assert 1.5 <= ratio <= 4.0, f"halving dt reduced the final infidelity by {ratio:.3f}x"


def test_domain_restricted_pool():
    pool = QitePool.full(4, domain=2)
    assert set(pool.strings) == set(odd_y_strings(4, max_span=2))
    assert all(max(s.support) - min(s.support) < 2 for s in pool.strings)
