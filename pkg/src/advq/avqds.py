"""Adaptive variational dynamics with a growing product of Pauli rotations.

The variational state is

    |C(theta)> = exp(theta_m K_m) ... exp(theta_1 K_1) |C0>,   K_j = -i P_j,

with odd-Y strings ``P_j`` so that each ``K_j`` is a real signed
permutation. New generators are appended on the left with ``theta = 0``,
which leaves the state unchanged and contributes the derivative ``K_g C``.

The McLachlan system is solved on the eigen-subspace of ``A`` above a
relative cutoff. Candidate generators are scored by the exact drop in the
residual norm when their derivative is added to that subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dns import infidelity
from .errors import ConfigError, NumericalError, StagnationError
from .mclachlan import mclachlan_distance, mclachlan_system, quadratic_distance
from .pauli import PauliString, generator_tables, odd_y_strings
from .problem import Problem, step_count
from .record import RunRecord
from .resources import count_run

CONNECTIVITIES = ("all-to-all", "linear-chain")
STAGNATION_TOL = 1e-12


@dataclass(frozen=True)
class OperatorPool:
    candidates: tuple
    max_weight: int
    connectivity: str = "all-to-all"

    def __post_init__(self):
        if self.connectivity not in CONNECTIVITIES:
            raise ConfigError(f"connectivity must be one of {CONNECTIVITIES}, got {self.connectivity!r}")
        if len(set(self.candidates)) != len(self.candidates):
            raise ConfigError("pool contains duplicates")
        for p in self.candidates:
            if p.y_count % 2 == 0 or p.is_identity() or p.weight > self.max_weight:
                raise ConfigError(f"{p} violates the pool restrictions")

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def qubits(self) -> int:
        return self.candidates[0].n


def pool_generate(n: int, max_weight: int, connectivity: str = "all-to-all") -> OperatorPool:
    """Odd-Y strings of weight at most ``max_weight`` in lexicographic order."""
    if not 1 <= max_weight <= n:
        raise ConfigError(f"pool weight must lie in [1, {n}], got {max_weight}")
    strings = odd_y_strings(n, max_weight, contiguous=connectivity == "linear-chain")
    return OperatorPool(tuple(strings), max_weight, connectivity)


@dataclass
class AdaptiveAnsatz:
    """Generators in application order (first entry acts first)."""

    generators: list = field(default_factory=list)
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.generators = [g if isinstance(g, PauliString) else PauliString(g) for g in self.generators]
        self.theta = np.asarray(self.theta, dtype=float)
        if len(self.generators) != len(self.theta):
            raise ConfigError("generator and parameter counts differ")
        for g in self.generators:
            if g.y_count % 2 == 0:
                raise ConfigError(f"{g} has even Y parity")

    def __len__(self) -> int:
        return len(self.generators)

    def trace(self) -> list:
        return [["rot", g.letters] for g in self.generators]


@dataclass
class AvqdsConfig:
    d_max: float = 1e-4
    max_adds_per_step: int = 10
    cutoff: float = 1e-4
    pool_weight: int | None = None
    connectivity: str = "all-to-all"
    resource_connectivity: str = "linear"

    def __post_init__(self):
        if not self.d_max > 0:
            raise ConfigError(f"d_max must be positive, got {self.d_max}")
        if self.max_adds_per_step < 1:
            raise ConfigError("max_adds_per_step must be at least 1")
        if not 0 < self.cutoff < 1:
            raise ConfigError(f"cutoff must lie in (0, 1), got {self.cutoff}")


def state_and_derivatives(psi0: np.ndarray, rows: list[int], theta: np.ndarray, tables
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Variational state and ``d psi / d theta_j`` from one forward sweep.

    ``rows`` index into the stacked generator ``tables``.
    """
    src, sign = tables
    psi = psi0.astype(float, copy=True)
    derivs = np.zeros((len(rows), psi0.shape[0]))
    for m, (row, angle) in enumerate(zip(rows, theta)):
        s, g = src[row], sign[row]
        c, sn = np.cos(angle), np.sin(angle)
        psi = c * psi + sn * g * psi[s]
        if m:
            derivs[:m] = c * derivs[:m] + sn * g * derivs[:m][:, s]
        derivs[m] = g * psi[s]
    return psi, derivs


@dataclass
class Solution:
    thetadot: np.ndarray
    basis: np.ndarray  # orthonormal columns spanning the kept derivative directions
    threshold: float  # smallest resolvable derivative norm
    residual: np.ndarray  # sum_j thetadot_j d_j + w
    distance: float


def truncated_solve(derivs: np.ndarray, system, cutoff: float) -> Solution:
    """Solve ``A thetadot = R`` keeping eigenvalues above ``cutoff * max``."""
    w = system.residual_vector
    dim = w.shape[0]
    if len(derivs) == 0:
        return Solution(np.zeros(0), np.zeros((dim, 0)), float(np.sqrt(cutoff)), w.copy(),
                        float(np.linalg.norm(w)))
    lam, vecs = np.linalg.eigh(system.a)
    top = max(lam[-1], 0.0)
    keep = lam > cutoff * top if top > 0 else np.zeros(lam.shape, bool)
    lam_k, vec_k = lam[keep], vecs[:, keep]
    thetadot = vec_k @ ((vec_k.T @ system.r) / lam_k)
    basis = (derivs.T @ vec_k) / np.sqrt(lam_k)
    residual = thetadot @ derivs + w
    threshold = float(np.sqrt(cutoff) * max(np.sqrt(top), 1.0))
    return Solution(thetadot, basis, threshold, residual, float(np.linalg.norm(residual)))


def score_candidates(psi: np.ndarray, solution: Solution, tables) -> np.ndarray:
    """Squared-distance reduction obtained by appending each candidate.

    Appending ``g`` adds the derivative ``v = K_g psi``. Its component
    outside the current subspace, ``u``, lowers ``D^2`` by ``(u.r)^2/|u|^2``
    where ``r`` is the current residual. Candidates whose ``|u|`` is below
    the solve threshold cannot be resolved and score zero.
    """
    src, sign = tables
    cand = sign * psi[src]
    q = solution.basis
    outside = cand - (cand @ q) @ q.T if q.shape[1] else cand
    norm2 = np.einsum("ij,ij->i", outside, outside)
    ok = np.sqrt(norm2) > solution.threshold
    proj = outside @ solution.residual
    return np.where(ok, proj ** 2 / np.where(ok, norm2, 1.0), 0.0)


@dataclass
class AdaptContext:
    """Fixed data shared by every adaptation: initial state, Hamiltonian parts, pool tables."""

    psi0: np.ndarray
    h1: object
    h2: object
    tables: tuple
    cfg: AvqdsConfig


def _evaluate(ctx: AdaptContext, rows, theta):
    psi, derivs = state_and_derivatives(ctx.psi0, rows, theta, ctx.tables)
    system = mclachlan_system(derivs, psi, ctx.h1, ctx.h2, check=False)
    return psi, derivs, system, truncated_solve(derivs, system, ctx.cfg.cutoff)


def adapt(ansatz_rows: list[int], theta: np.ndarray, psi: np.ndarray, derivs: np.ndarray,
          system, solution: Solution, ctx: AdaptContext):
    """Grow the ansatz greedily until ``D < d_max`` or the per-step cap.

    Returns ``(rows, theta, derivs, system, solution, added_rows)``.
    Raises :class:`StagnationError` if the best candidate cannot lower ``D``.
    """
    added = []
    while solution.distance >= ctx.cfg.d_max and len(added) < ctx.cfg.max_adds_per_step:
        gain = score_candidates(psi, solution, ctx.tables)
        best = int(np.argmax(gain))
        new_distance = np.sqrt(max(solution.distance ** 2 - gain[best], 0.0))
        if solution.distance - new_distance <= STAGNATION_TOL:
            raise StagnationError(
                f"no pool operator lowers D below {solution.distance:.6e}", solution.distance)
        ansatz_rows = ansatz_rows + [best]
        theta = np.append(theta, 0.0)
        src, sign = ctx.tables
        derivs = np.vstack([derivs, sign[best] * psi[src[best]]])
        system = mclachlan_system(derivs, psi, ctx.h1, ctx.h2, check=False)
        solution = truncated_solve(derivs, system, ctx.cfg.cutoff)
        added.append(best)
    return ansatz_rows, theta, derivs, system, solution, added


AVQDS_COLUMNS = ["step", "t", "infidelity", "norm", "D", "n_params", "added", "added_ops", "stagnated"]


def avqds_run(problem: Problem, dt: float, total: float, cfg: AvqdsConfig | None = None,
              pool: OperatorPool | None = None) -> RunRecord:
    """Adaptive McLachlan evolution from the embedded initial state."""
    cfg = cfg or AvqdsConfig()
    n = problem.qubits
    if pool is None:
        pool = pool_generate(n, cfg.pool_weight or n, cfg.connectivity)
    if pool.qubits != n:
        raise ConfigError(f"pool acts on {pool.qubits} qubits, problem has {n}")
    steps = step_count(dt, total)
    reference = problem.reference(steps, dt)
    h1, h2 = problem.split()
    mclachlan_system(np.zeros((0, 1 << n)), problem.initial, h1, h2)  # Hermitian check
    ctx = AdaptContext(problem.initial, h1, h2, generator_tables(pool.candidates, n), cfg)

    record = RunRecord(method="avqds", columns=list(AVQDS_COLUMNS))
    rows: list[int] = []
    theta = np.zeros(0)
    norm = 1.0
    psi = problem.initial.astype(float)
    record.append(step=0, t=0.0, infidelity=infidelity(psi, reference[0][0]), norm=1.0,
                  D=0.0, n_params=0, added=0, added_ops="", stagnated=0)
    stagnations = 0
    for k in range(steps):
        psi, derivs, system, solution = _evaluate(ctx, rows, theta)
        stalled = 0
        try:
            rows, theta, derivs, system, solution, added = adapt(
                rows, theta, psi, derivs, system, solution, ctx)
        except StagnationError:
            # keep the current ansatz; the plateau shows up in the D column
            added, stalled = [], 1
            stagnations += 1
        theta = theta + dt * solution.thetadot
        norm *= 1.0 - dt * system.h1_mean
        if not np.all(np.isfinite(theta)):
            raise NumericalError(f"step {k + 1}: parameters became non-finite")
        psi, _ = state_and_derivatives(ctx.psi0, rows, theta, ctx.tables)
        record.append(step=k + 1, t=(k + 1) * dt, infidelity=infidelity(psi, reference[k + 1][0]),
                      norm=norm, D=solution.distance, n_params=len(rows), added=len(added),
                      added_ops=";".join(pool.candidates[g].letters for g in added), stagnated=stalled)
    ansatz = AdaptiveAnsatz([pool.candidates[g] for g in rows], theta)
    record.trace = ansatz.trace()
    record.resources = count_run(record.trace, cfg.resource_connectivity)
    record.extras = {"generators": [g.letters for g in ansatz.generators],
                     "theta": [float(v) for v in theta], "pool_size": len(pool),
                     "stagnations": stagnations}
    return record


__all__ = [
    "AdaptContext", "AdaptiveAnsatz", "AvqdsConfig", "OperatorPool", "Solution", "adapt", "avqds_run",
    "mclachlan_distance", "pool_generate", "quadratic_distance", "score_candidates",
    "state_and_derivatives", "truncated_solve",
]
