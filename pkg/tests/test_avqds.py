import numpy as np
import pytest

from advq.avqds import (
    AdaptContext,
    AdaptiveAnsatz,
    AvqdsConfig,
    OperatorPool,
    adapt,
    avqds_run,
    pool_generate,
    state_and_derivatives,
    truncated_solve,
)
from advq.errors import ConfigError
from advq.hamiltonian import Transport1DConfig, hamiltonian_1d, hermitian_split
from advq.mclachlan import mclachlan_distance, mclachlan_system, quadratic_distance
from advq.pauli import PauliString, generator_tables, to_dense
from advq.problem import problem_1d
from conftest import kron_string


@pytest.mark.parametrize("w, size", [(2, 120), (3, 848), (4, 3648), (8, 32640)])
def test_pool_sizes_eight_qubits(w, size):
    assert len(pool_generate(8, w)) == size


def test_pool_contents():
    pool = pool_generate(4, 2, "linear-chain")
    for p in pool.candidates:
        assert p.y_count % 2 == 1 and p.weight <= 2
        assert max(p.support) - min(p.support) < p.weight
    assert list(pool.candidates) == sorted(pool.candidates, key=lambda p: p.letters)
    assert len(pool) < len(pool_generate(4, 2))


def test_pool_validation():
    with pytest.raises(ConfigError):
        pool_generate(4, 0)
    with pytest.raises(ConfigError):
        OperatorPool((PauliString("XX"),), 2)
    with pytest.raises(ConfigError):
        OperatorPool((PauliString("YYY"),), 2)
    with pytest.raises(ConfigError):
        AdaptiveAnsatz(["XZ"], [0.0])
    with pytest.raises(ConfigError):
        AvqdsConfig(d_max=0.0)


def _single_qubit_context(alpha, cfg=None):
    """H = i alpha Y, so exp(-H t) = exp(-i alpha Y t) is a real rotation."""
    psi0 = np.array([0.6, 0.8])
    h1, h2 = np.zeros((2, 2)), alpha * kron_string("Y")
    pool = OperatorPool((PauliString("Y"),), 1)
    return AdaptContext(psi0, h1, h2, generator_tables(pool.candidates, 1), cfg or AvqdsConfig()), pool


def test_exactly_expressible_distance_vanishes():
    ctx, _ = _single_qubit_context(0.9)
    psi, derivs = state_and_derivatives(ctx.psi0, [0], np.array([0.3]), ctx.tables)
    system = mclachlan_system(derivs, psi, ctx.h1, ctx.h2)
    solution = truncated_solve(derivs, system, 1e-4)
    assert solution.distance < 1e-10
    assert mclachlan_distance(psi, derivs, solution.thetadot, ctx.h1, ctx.h2) < 1e-10
    assert solution.thetadot[0] == pytest.approx(0.9)


def test_single_addition_reaches_zero_distance():
    ctx, _ = _single_qubit_context(0.9)
    psi = ctx.psi0
    derivs = np.zeros((0, 2))
    system = mclachlan_system(derivs, psi, ctx.h1, ctx.h2)
    solution = truncated_solve(derivs, system, 1e-4)
    assert solution.distance == pytest.approx(0.9)
    rows, theta, _, _, solution, added = adapt([], np.zeros(0), psi, derivs, system, solution, ctx)
    assert added == [0] and rows == [0] and theta.tolist() == [0.0]
    assert solution.distance < 1e-10


def test_no_addition_below_threshold():
    ctx, _ = _single_qubit_context(1e-6)
    derivs = np.zeros((0, 2))
    system = mclachlan_system(derivs, ctx.psi0, ctx.h1, ctx.h2)
    solution = truncated_solve(derivs, system, 1e-4)
    assert adapt([], np.zeros(0), ctx.psi0, derivs, system, solution, ctx)[-1] == []


def test_empty_ansatz_distance_is_operator_spread():
    cfg = Transport1DConfig(3, 10.0)
    h1, h2 = hermitian_split(hamiltonian_1d(cfg))
    d1, d2 = to_dense(h1, 3), to_dense(h2, 3)
    psi = problem_1d(cfg).initial
    spread = (d1 - np.vdot(psi, d1 @ psi).real * np.eye(8)) @ psi + 1j * (
        d2 - np.vdot(psi, d2 @ psi).real * np.eye(8)) @ psi
    derivs = np.zeros((0, 8))
    assert mclachlan_distance(psi, derivs, np.zeros(0), d1, d2) == pytest.approx(np.linalg.norm(spread), abs=1e-12)
    system = mclachlan_system(derivs, psi, d1, d2)
    assert quadratic_distance(system, np.zeros(0)) == pytest.approx(np.linalg.norm(spread), abs=1e-12)


def test_product_state_derivatives_match_finite_differences(rng):
    pool = pool_generate(3, 3)
    tables = generator_tables(pool.candidates, 3)
    psi0 = rng.normal(size=8)
    psi0 /= np.linalg.norm(psi0)
    rows = [3, 17, 5, 3, 22]
    theta = rng.uniform(-1, 1, len(rows))
    psi, derivs = state_and_derivatives(psi0, rows, theta, tables)
    h = 1e-6
    for j in range(len(rows)):
        step = np.zeros_like(theta)
        step[j] = h
        up, _ = state_and_derivatives(psi0, rows, theta + step, tables)
        down, _ = state_and_derivatives(psi0, rows, theta - step, tables)
        assert np.max(np.abs((up - down) / (2 * h) - derivs[j])) < 1e-8


def test_identity_insertion_keeps_state():
    pool = pool_generate(3, 2)
    tables = generator_tables(pool.candidates, 3)
    psi0 = problem_1d(Transport1DConfig(3, 32.0)).initial
    theta = np.array([0.1, -0.4])
    before, _ = state_and_derivatives(psi0, [2, 9], theta, tables)
    after, _ = state_and_derivatives(psi0, [2, 9, 4], np.append(theta, 0.0), tables)
    np.testing.assert_array_equal(after, before)


def test_greedy_choice_matches_brute_force():
    problem = problem_1d(Transport1DConfig(2, 10.0))
    h1, _ = problem.split()
    h1 = np.real(h1.toarray() if hasattr(h1, "toarray") else np.asarray(h1))
    h2 = np.zeros((4, 4))
    pool = pool_generate(2, 2)
    ctx = AdaptContext(problem.initial, h1, h2, generator_tables(pool.candidates, 2),
                       AvqdsConfig(max_adds_per_step=1))
    psi = problem.initial
    derivs = np.zeros((0, 4))
    system = mclachlan_system(derivs, psi, h1, h2)
    solution = truncated_solve(derivs, system, ctx.cfg.cutoff)
    _, _, _, _, greedy_solution, added = adapt([], np.zeros(0), psi, derivs, system, solution, ctx)

    src, sign = ctx.tables
    distances = []
    for j in range(len(pool)):
        d = (sign[j] * psi[src[j]])[None, :]
        sys_j = mclachlan_system(d, psi, h1, h2)
        thetadot, *_ = np.linalg.lstsq(sys_j.a, sys_j.r, rcond=None)
        distances.append(mclachlan_distance(psi, d, thetadot, h1, h2))
    distances = np.array(distances)
    first_best = int(np.flatnonzero(distances <= distances.min() + 1e-12)[0])
    assert added == [first_best]
    assert greedy_solution.distance == pytest.approx(distances.min(), abs=1e-12)


@pytest.fixture(scope="module")
def short_run():
    problem = problem_1d(Transport1DConfig(3, 32.0))
    return avqds_run(problem, 0.002, 0.2, AvqdsConfig(d_max=1e-3, max_adds_per_step=3))


def test_parameter_count_never_decreases(short_run):
    counts = short_run.column("n_params")
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] == len(short_run.extras["generators"])


def test_distance_below_threshold_after_adaptation(short_run):
    for row in short_run.rows[1:]:
        values = dict(zip(short_run.columns, row))
        if not values["stagnated"] and values["added"] < 3:
            assert values["D"] < 1e-3


def test_run_is_deterministic(short_run):
    problem = problem_1d(Transport1DConfig(3, 32.0))
    again = avqds_run(problem, 0.002, 0.2, AvqdsConfig(d_max=1e-3, max_adds_per_step=3))
    assert again.to_csv() == short_run.to_csv()


def test_added_ops_column_lists_strings(short_run):
    for ops, added in zip(short_run.column("added_ops"), short_run.column("added")):
        assert len([p for p in str(ops).split(";") if p]) == added


def test_state_stays_real():
    problem = problem_1d(Transport1DConfig(3, 32.0))
    pool = pool_generate(3, 3)
    record = avqds_run(problem, 0.002, 0.05, AvqdsConfig(), pool)
    rows = [pool.candidates.index(PauliString(g)) for g in record.extras["generators"]]
    psi, _ = state_and_derivatives(problem.initial, rows, np.array(record.extras["theta"]),
                                   generator_tables(pool.candidates, 3))
    assert np.isrealobj(psi)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_smaller_threshold_does_not_hurt():
    problem = problem_1d(Transport1DConfig(4, 32.0))
    finals = [avqds_run(problem, 0.002, 1.0, AvqdsConfig(d_max=d, connectivity="linear-chain")).final["infidelity"]
              for d in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b <= a for a, b in zip(finals, finals[1:])), finals
