"""Variational time evolution with a fixed hardware-efficient ansatz.

The ansatz acting on ``|0...0>`` is ``L`` layers of per-qubit Y rotations
followed by a brickwork of nearest-neighbour CX gates (even bonds, then odd
bonds), closed by a final Y-rotation layer. ``RY(theta) = exp(-i theta Y/2)``.
Every gate is a real matrix, so states and derivatives stay real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .dns import infidelity
from .errors import ConfigError, FitError, NumericalError
from .mclachlan import McLachlanSystem, mclachlan_distance, mclachlan_system, solve_lstsq
from .problem import Problem, step_count
from .record import RunRecord
from .resources import count_run, structural_depth


@dataclass(frozen=True)
class HardwareEfficientAnsatz:
    qubits: int
    layers: int

    def __post_init__(self):
        if self.qubits < 1 or self.layers < 0:
            raise ConfigError(f"invalid ansatz size: qubits={self.qubits}, layers={self.layers}")

    @property
    def n_params(self) -> int:
        return self.qubits * (self.layers + 1)

    def entanglers(self) -> list[tuple[int, int]]:
        bonds = [(q, q + 1) for q in range(self.qubits - 1)]
        return bonds[0::2] + bonds[1::2]

    def gates(self) -> list[tuple]:
        """``("ry", qubit, param_index)`` and ``("cx", control, target)`` in order."""
        out = []
        index = 0
        for _ in range(self.layers):
            for q in range(self.qubits):
                out.append(("ry", q, index))
                index += 1
            out.extend(("cx", c, t) for c, t in self.entanglers())
        for q in range(self.qubits):
            out.append(("ry", q, index))
            index += 1
        return out

    def trace(self) -> list:
        return [["ry", g[1]] if g[0] == "ry" else ["cx", g[1], g[2]] for g in self.gates()]

    def structural_depth(self) -> int:
        return structural_depth(self.trace())


def _ry(states: np.ndarray, q: int, n: int, theta: float) -> np.ndarray:
    shaped = states.reshape(-1, 1 << q, 2, 1 << (n - q - 1))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty_like(shaped)
    out[:, :, 0] = c * shaped[:, :, 0] - s * shaped[:, :, 1]
    out[:, :, 1] = s * shaped[:, :, 0] + c * shaped[:, :, 1]
    return out.reshape(states.shape)


def _half_generator(states: np.ndarray, q: int, n: int) -> np.ndarray:
    """``(1/2)(-i Y)`` on qubit ``q``."""
    shaped = states.reshape(-1, 1 << q, 2, 1 << (n - q - 1))
    out = np.empty_like(shaped)
    out[:, :, 0] = -0.5 * shaped[:, :, 1]
    out[:, :, 1] = 0.5 * shaped[:, :, 0]
    return out.reshape(states.shape)


def _cx_perm(c: int, t: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    ctrl = (idx >> (n - 1 - c)) & 1
    return idx ^ (ctrl << (n - 1 - t))


def _check_theta(ansatz: HardwareEfficientAnsatz, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ConfigError(f"expected {ansatz.n_params} parameters, got {theta.shape}")
    return theta


def ansatz_state(ansatz: HardwareEfficientAnsatz, theta) -> np.ndarray:
    theta = _check_theta(ansatz, theta)
    n = ansatz.qubits
    psi = np.zeros(1 << n)
    psi[0] = 1.0
    for gate in ansatz.gates():
        if gate[0] == "ry":
            psi = _ry(psi, gate[1], n, theta[gate[2]])
        else:
            psi = psi[_cx_perm(gate[1], gate[2], n)]
    return psi


def ansatz_derivatives(ansatz: HardwareEfficientAnsatz, theta) -> tuple[np.ndarray, np.ndarray]:
    """State and all ``d psi / d theta_j`` from one forward sweep.

    Returns ``(psi, derivs)`` with ``derivs`` of shape ``(n_params, 2**n)``.
    """
    theta = _check_theta(ansatz, theta)
    n = ansatz.qubits
    psi = np.zeros(1 << n)
    psi[0] = 1.0
    derivs = np.zeros((ansatz.n_params, 1 << n))
    done = 0
    for gate in ansatz.gates():
        if gate[0] == "ry":
            q, j = gate[1], gate[2]
            psi = _ry(psi, q, n, theta[j])
            if done:
                derivs[:done] = _ry(derivs[:done], q, n, theta[j])
            derivs[j] = _half_generator(psi, q, n)
            done = j + 1
        else:
            perm = _cx_perm(gate[1], gate[2], n)
            psi = psi[perm]
            if done:
                derivs[:done] = derivs[:done][:, perm]
    return psi, derivs


@dataclass
class FitConfig:
    restarts: int = 10
    tol: float = 1e-10
    accept: float = 1e-8
    seed: int = 0
    max_iter: int = 5000


def fit_initial(ansatz: HardwareEfficientAnsatz, target: np.ndarray, cfg: FitConfig | None = None
                ) -> tuple[np.ndarray, float]:
    """Multi-start BFGS fit of ``1 - |<target|psi(theta)>|^2`` with exact gradients.

    The first start is ``theta = 0``; later starts are uniform in
    ``[-pi, pi)`` from a seeded generator.
    """
    cfg = cfg or FitConfig()
    target = np.asarray(target, dtype=float)
    if target.shape != (1 << ansatz.qubits,):
        raise ConfigError(f"target length {target.shape} does not match {ansatz.qubits} qubits")

    def objective(theta):
        psi, derivs = ansatz_derivatives(ansatz, theta)
        overlap = target @ psi
        return 1.0 - overlap ** 2, -2.0 * overlap * (derivs @ target)

    rng = np.random.default_rng(cfg.seed)
    best_theta, best_value = np.zeros(ansatz.n_params), np.inf
    for attempt in range(max(cfg.restarts, 1)):
        start = np.zeros(ansatz.n_params) if attempt == 0 else rng.uniform(-np.pi, np.pi, ansatz.n_params)
        result = scipy.optimize.minimize(objective, start, jac=True, method="BFGS",
                                         options={"gtol": 1e-10, "maxiter": cfg.max_iter})
        value = float(objective(result.x)[0])
        if value < best_value:
            best_theta, best_value = result.x, value
        if best_value < cfg.tol:
            break
    best_value = max(best_value, 0.0)
    if best_value > cfg.accept:
        raise FitError(f"best fit infidelity {best_value:.3e} exceeds {cfg.accept:.1e}")
    return best_theta, best_value


def varqte_step(theta: np.ndarray, system: McLachlanSystem, dt: float, rcond: float = 1e-8
                ) -> tuple[np.ndarray, np.ndarray, float]:
    """Euler update ``theta + dt * A^+ R``; returns new theta, velocity and residual."""
    thetadot, residual = solve_lstsq(system, rcond)
    return theta + dt * thetadot, thetadot, residual


def _velocity(ansatz, theta, h1, h2, rcond):
    psi, derivs = ansatz_derivatives(ansatz, theta)
    system = mclachlan_system(derivs, psi, h1, h2, check=False)
    return solve_lstsq(system, rcond)[0], system.h1_mean


def rk4_step(ansatz: HardwareEfficientAnsatz, theta: np.ndarray, h1, h2, dt: float, rcond: float = 1e-8
             ) -> tuple[np.ndarray, float]:
    """Classic Runge-Kutta update of ``theta``; also returns the stage-averaged ``<H1>``."""
    k1, e1 = _velocity(ansatz, theta, h1, h2, rcond)
    k2, e2 = _velocity(ansatz, theta + 0.5 * dt * k1, h1, h2, rcond)
    k3, e3 = _velocity(ansatz, theta + 0.5 * dt * k2, h1, h2, rcond)
    k4, e4 = _velocity(ansatz, theta + dt * k3, h1, h2, rcond)
    return theta + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), (e1 + 2 * e2 + 2 * e3 + e4) / 6


INTEGRATORS = ("euler", "rk4")


@dataclass
class VarqteConfig:
    layers: int = 10
    rcond: float = 1e-8
    fit: FitConfig | None = None
    connectivity: str = "linear"
    integrator: str = "euler"

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")


VARQTE_COLUMNS = ["step", "t", "infidelity", "norm", "D", "n_params", "solve_residual"]


def varqte_run(problem: Problem, dt: float, total: float, cfg: VarqteConfig | None = None) -> RunRecord:
    """Fit the ansatz to the initial state, then integrate ``A thetadot = R``."""
    cfg = cfg or VarqteConfig()
    ansatz = HardwareEfficientAnsatz(problem.qubits, cfg.layers)
    steps = step_count(dt, total)
    reference = problem.reference(steps, dt)
    h1, h2 = problem.split()
    mclachlan_system(np.zeros((0, 1 << problem.qubits)), problem.initial, h1, h2)  # Hermitian check
    theta, fit_value = fit_initial(ansatz, problem.initial, cfg.fit)
    record = RunRecord(method="varqte", columns=list(VARQTE_COLUMNS))
    norm = 1.0
    psi, derivs = ansatz_derivatives(ansatz, theta)
    for k in range(steps + 1):
        system = mclachlan_system(derivs, psi, h1, h2, check=False)
        thetadot, residual = solve_lstsq(system, cfg.rcond)
        distance = mclachlan_distance(psi, derivs, thetadot, h1, h2)
        record.append(step=k, t=k * dt, infidelity=infidelity(psi, reference[k][0]), norm=norm,
                      D=distance, n_params=ansatz.n_params, solve_residual=residual)
        if k == steps:
            break
        if cfg.integrator == "rk4":
            theta, h1_mean = rk4_step(ansatz, theta, h1, h2, dt, cfg.rcond)
            norm *= np.exp(-dt * h1_mean)
        else:
            theta = theta + dt * thetadot
            norm *= 1.0 - dt * system.h1_mean
        psi, derivs = ansatz_derivatives(ansatz, theta)
        if not np.all(np.isfinite(theta)):
            raise NumericalError(f"step {k + 1}: parameters became non-finite")
    record.trace = ansatz.trace()
    record.resources = count_run(record.trace, cfg.connectivity)
    record.extras = {"fit_infidelity": fit_value, "structural_depth": ansatz.structural_depth(),
                     "theta": [float(v) for v in theta]}
    return record
