"""Problem definitions: initial profiles and the 2D rotating-flow operator.

2D fields live on a ``2**n x 2**n`` cell-centred grid over
``[-Lx/2, Lx/2] x [-Ly/2, Ly/2]``. Grid point ``(i, j)`` is stored at the
bit-interleaved index ``k = (b0 a0 b1 a1 ...)`` where ``a`` are the bits of
``i`` (x index) and ``b`` the bits of ``j`` (y index), most significant first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError

MAX_QUBITS_PER_AXIS = 5


@dataclass(frozen=True)
class Transport2DConfig:
    qubits_per_axis: int
    gamma: float = 0.01
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.qubits_per_axis) != self.qubits_per_axis or self.qubits_per_axis < 2:
            raise ConfigError(f"need at least 2 qubits per axis, got {self.qubits_per_axis}")
        if not self.gamma > 0:
            raise ConfigError(f"diffusion coefficient must be positive, got {self.gamma}")
        if not (self.lx > 0 and self.ly > 0):
            raise ConfigError("domain lengths must be positive")

    @property
    def qubits(self) -> int:
        return 2 * self.qubits_per_axis

    @property
    def points(self) -> int:
        return 1 << self.qubits_per_axis

    @property
    def dx(self) -> float:
        return self.lx / self.points

    @property
    def dy(self) -> float:
        return self.ly / self.points

    def x(self, i) -> np.ndarray:
        """Cell-centred x coordinate; ``i`` may lie outside ``[0, 2**n)``."""
        return -self.lx / 2 + (np.asarray(i) + 0.5) * self.dx

    def y(self, j) -> np.ndarray:
        return -self.ly / 2 + (np.asarray(j) + 0.5) * self.dy


def _check_range(value: int, limit: int, name: str) -> None:
    if not 0 <= value < limit:
        raise ConfigError(f"{name}={value} outside [0, {limit})")


def interleave(i: int, j: int, n: int) -> int:
    """Flat index with the bits of ``j`` in the upper slot of each pair."""
    _check_range(i, 1 << n, "i")
    _check_range(j, 1 << n, "j")
    k = 0
    for bit in range(n - 1, -1, -1):
        k = (k << 2) | (((j >> bit) & 1) << 1) | ((i >> bit) & 1)
    return k


def deinterleave(k: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`interleave`, returning ``(i, j)``."""
    _check_range(k, 1 << (2 * n), "k")
    i = j = 0
    for bit in range(n - 1, -1, -1):
        pair = (k >> (2 * bit)) & 3
        j = (j << 1) | (pair >> 1)
        i = (i << 1) | (pair & 1)
    return i, j


def interleave_table(n: int) -> np.ndarray:
    """``table[i, j]`` is the flat index of grid point ``(i, j)``."""
    size = 1 << n
    i = np.arange(size)[:, None]
    j = np.arange(size)[None, :]
    k = np.zeros((size, size), dtype=np.int64)
    for bit in range(n - 1, -1, -1):
        k = (k << 2) | (((j >> bit) & 1) << 1) | ((i >> bit) & 1)
    return k


def operator_triplets_2d(cfg: Transport2DConfig, advection: bool = True, diffusion: bool = True):
    """Coordinate triplets ``(rows, cols, values)`` of the 2D operator.

    Each row ``k = (i, j)`` couples to its four periodic neighbours. The
    advection coefficients use the unwrapped neighbour coordinates, so a
    neighbour across the periodic seam keeps the coordinate just outside the
    domain.
    """
    n = cfg.qubits_per_axis
    if n > MAX_QUBITS_PER_AXIS:
        raise ConfigError(f"2D operator limited to {MAX_QUBITS_PER_AXIS} qubits per axis")
    size = cfg.points
    table = interleave_table(n)
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    i, j = i.ravel(), j.ravel()
    xi, yj = cfg.x(i), cfg.y(j)
    adv = 1.0 if advection else 0.0
    gx = cfg.gamma / cfg.dx ** 2 if diffusion else 0.0
    gy = cfg.gamma / cfg.dy ** 2 if diffusion else 0.0
    rows = table[i, j]
    # -d(Ux C)/dx - d(Uy C)/dy with (Ux, Uy) = (-y, x)/r, central differences
    neighbours = [
        (table[(i + 1) % size, j], adv * yj / (2 * cfg.dx * np.hypot(cfg.x(i + 1), yj)) + gx),
        (table[(i - 1) % size, j], -adv * yj / (2 * cfg.dx * np.hypot(cfg.x(i - 1), yj)) + gx),
        (table[i, (j + 1) % size], -adv * xi / (2 * cfg.dy * np.hypot(xi, cfg.y(j + 1))) + gy),
        (table[i, (j - 1) % size], adv * xi / (2 * cfg.dy * np.hypot(xi, cfg.y(j - 1))) + gy),
    ]
    all_rows = [rows]
    all_cols = [rows]
    all_vals = [np.full(rows.shape, -2.0 * (gx + gy))]
    for cols, vals in neighbours:
        all_rows.append(rows)
        all_cols.append(cols)
        all_vals.append(vals)
    return np.concatenate(all_rows), np.concatenate(all_cols), np.concatenate(all_vals)


def operator_matrix_2d(cfg: Transport2DConfig, advection: bool = True, diffusion: bool = True):
    """Sparse CSR transport operator ``A`` of shape ``4**n x 4**n``."""
    rows, cols, vals = operator_triplets_2d(cfg, advection, diffusion)
    dim = cfg.points ** 2
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


@dataclass(frozen=True)
class InitialProfile:
    """Initial scalar field.

    ``trapezoid`` (1D) is zero up to ``start``, ramps linearly to ``height``
    at ``ramp_end``, stays flat to ``plateau_end`` and returns to zero at
    ``stop``; positions are fractions of the unit interval sampled at
    ``x_i = i / points``.

    ``l_shape`` (2D) is ``height`` on the union of a vertical bar
    ``[corner, corner + thickness) x [corner, corner + arm)`` and a horizontal
    bar ``[corner, corner + arm) x [corner, corner + thickness)`` in
    fractional index coordinates ``(i / points, j / points)``.

    ``custom_samples`` passes ``samples`` through unchanged.
    """

    kind: str = "trapezoid"
    start: float = 0.25
    ramp_end: float = 0.375
    plateau_end: float = 0.625
    stop: float = 0.75
    corner: float = 3 / 16
    arm: float = 10 / 16
    thickness: float = 6 / 16
    height: float = 1.0
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("trapezoid", "l_shape", "custom_samples"):
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.kind == "trapezoid" and not (
            0 <= self.start < self.ramp_end <= self.plateau_end < self.stop <= 1
        ):
            raise ConfigError("trapezoid breakpoints must be increasing inside [0, 1]")
        if not self.height > 0:
            raise ConfigError("profile height must be positive")

    @property
    def dimension(self) -> int:
        return 2 if self.kind == "l_shape" else 1

    def to_dict(self) -> dict:
        if self.kind == "custom_samples":
            return {"kind": self.kind, "samples": [float(v) for v in self.samples]}
        keys = {
            "trapezoid": ("start", "ramp_end", "plateau_end", "stop", "height"),
            "l_shape": ("corner", "arm", "thickness", "height"),
        }[self.kind]
        return {"kind": self.kind, **{k: getattr(self, k) for k in keys}}

    @classmethod
    def from_dict(cls, data: dict) -> "InitialProfile":
        data = dict(data)
        if "samples" in data:
            data["samples"] = tuple(float(v) for v in data["samples"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad profile fields: {exc}") from None


def build_profile(profile: InitialProfile, points: int) -> np.ndarray:
    """Non-negative samples in state ordering.

    ``points`` is the number of grid points per axis. 2D profiles are
    returned flattened with the interleaved index.
    """
    if profile.kind == "custom_samples":
        values = np.asarray(profile.samples, dtype=float)
    elif profile.kind == "trapezoid":
        x = np.arange(points) / points
        rise = (x - profile.start) / (profile.ramp_end - profile.start)
        fall = (profile.stop - x) / (profile.stop - profile.plateau_end)
        values = profile.height * np.clip(np.minimum(rise, fall), 0.0, 1.0)
    else:
        n = points.bit_length() - 1
        if points != 1 << n:
            raise ConfigError(f"2D grid size must be a power of two, got {points}")
        u = np.arange(points) / points
        lo = profile.corner
        thin = (u >= lo) & (u < lo + profile.thickness)
        long = (u >= lo) & (u < lo + profile.arm)
        mask = (thin[:, None] & long[None, :]) | (long[:, None] & thin[None, :])
        grid = profile.height * mask.astype(float)
        values = np.zeros(points * points)
        values[interleave_table(n).ravel()] = grid.ravel()
    if np.any(values < 0):
        raise ConfigError("profile samples must be non-negative")
    if not np.any(values > 0):
        raise ConfigError("profile is identically zero")
    return values
