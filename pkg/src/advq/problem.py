"""A transport problem bundled with its initial state and reference data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import dns
from .errors import ConfigError
from .hamiltonian import Transport1DConfig, hermitian_split, operator_matrix_1d
from .transport import InitialProfile, Transport2DConfig, build_profile, operator_matrix_2d


def amplitude_embed(samples) -> np.ndarray:
    """Samples divided by their 2-norm, ready to use as amplitudes."""
    samples = np.asarray(samples, dtype=float)
    dim = samples.shape[0]
    if samples.ndim != 1 or dim == 0 or dim & (dim - 1):
        raise ConfigError(f"need a 1-D sample vector of power-of-two length, got {samples.shape}")
    norm = np.linalg.norm(samples)
    if norm == 0:
        raise ConfigError("cannot embed the zero vector")
    return samples / norm


def step_count(dt: float, total: float) -> int:
    """Number of whole steps of size ``dt`` covering ``[0, total]``."""
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if total < 0:
        raise ConfigError(f"total time must be non-negative, got {total}")
    steps = round(total / dt)
    if abs(total / dt - steps) > 1e-9:
        raise ConfigError(f"T={total} is not a whole number of steps of {dt}")
    return int(steps)


@dataclass
class Problem:
    """Linear system ``dC/dt = A C`` on ``qubits`` qubits.

    ``operator`` is ``A`` (dense or sparse, real); the Hamiltonian is ``-A``.
    ``initial`` is the embedded initial state and ``scale`` the norm of the
    raw samples, so that ``scale * initial`` is the physical field.
    """

    operator: object
    initial: np.ndarray
    qubits: int
    scale: float = 1.0
    label: str = ""
    _ref_cache: dict = field(default_factory=dict, repr=False)

    @property
    def hamiltonian(self):
        return -self.operator

    def split(self):
        """``(H1, H2)`` with ``H = H1 + i H2``."""
        return hermitian_split(self.hamiltonian)

    def dense_hamiltonian(self) -> np.ndarray:
        h = self.hamiltonian
        return h.toarray() if sp.issparse(h) else np.asarray(h)

    def reference(self, steps: int, dt: float) -> list[tuple[np.ndarray, float]]:
        """Normalized exact states and norms at ``t = k dt``, ``k = 0..steps``."""
        key = (steps, dt)
        if key not in self._ref_cache:
            times = np.arange(steps + 1) * dt
            self._ref_cache[key] = dns.reference_series(self.operator, self.initial, times)
        return self._ref_cache[key]


def problem_1d(cfg: Transport1DConfig, profile: InitialProfile | None = None) -> Problem:
    profile = profile or InitialProfile()
    if profile.dimension != 1:
        raise ConfigError(f"profile {profile.kind!r} is not one-dimensional")
    samples = build_profile(profile, cfg.points)
    if samples.shape[0] != cfg.points:
        raise ConfigError(f"expected {cfg.points} samples, got {samples.shape[0]}")
    return Problem(
        operator=operator_matrix_1d(cfg),
        initial=amplitude_embed(samples),
        qubits=cfg.qubits,
        scale=float(np.linalg.norm(samples)),
        label=f"1d n={cfg.qubits} pe={cfg.peclet:g}",
    )


def problem_2d(cfg: Transport2DConfig, profile: InitialProfile | None = None) -> Problem:
    profile = profile or InitialProfile(kind="l_shape")
    if profile.kind == "trapezoid":
        raise ConfigError("the trapezoid profile is one-dimensional")
    samples = build_profile(profile, cfg.points)
    if samples.shape[0] != cfg.points ** 2:
        raise ConfigError(f"expected {cfg.points ** 2} samples, got {samples.shape[0]}")
    return Problem(
        operator=operator_matrix_2d(cfg),
        initial=amplitude_embed(samples),
        qubits=cfg.qubits,
        scale=float(np.linalg.norm(samples)),
        label=f"2d n={cfg.qubits_per_axis} gamma={cfg.gamma:g}",
    )
