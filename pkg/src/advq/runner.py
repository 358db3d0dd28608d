"""Run configuration, method dispatch, persistence and sweeps."""

from __future__ import annotations

import copy
import csv
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .avqds import AvqdsConfig, avqds_run
from .dns import reference_series
from .errors import AdvqError, ConfigError
from .hamiltonian import Transport1DConfig
from .problem import Problem, amplitude_embed, problem_1d, problem_2d, step_count
from .qite import QiteConfig, QitePool, qite_run
from .record import RunRecord, format_value
from .resources import ResourceCount
from .transport import InitialProfile, Transport2DConfig
from .varqte import FitConfig, VarqteConfig, varqte_run

METHODS = ("dns", "qite", "varqte", "avqds")

__all__ = ["RunConfig", "RunRecord", "amplitude_embed", "build_problem", "run", "sample_shots", "sweep"]


def _from_dict(cls, data: dict | None):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class RunConfig:
    """Everything needed to reproduce one run.

    ``problem`` holds ``dimension`` plus either ``qubits``/``peclet`` (1D) or
    ``qubits_per_axis``/``gamma``/``lx``/``ly`` (2D). Method options live in
    the ``qite``, ``varqte`` and ``avqds`` sections; only the one matching
    ``method`` is used.
    """

    method: str = "avqds"
    problem: dict = field(default_factory=lambda: {"dimension": 1, "qubits": 4, "peclet": 32.0})
    profile: dict | None = None
    dt: float = 0.002
    T: float = 1.0
    seed: int = 0
    qite: dict = field(default_factory=dict)
    varqte: dict = field(default_factory=dict)
    avqds: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        step_count(self.dt, self.T)
        self.problem_config()
        self.initial_profile()

    def problem_config(self):
        data = dict(self.problem)
        dimension = data.pop("dimension", 1)
        if dimension == 1:
            return _from_dict(Transport1DConfig, data)
        if dimension == 2:
            return _from_dict(Transport2DConfig, data)
        raise ConfigError(f"dimension must be 1 or 2, got {dimension}")

    @property
    def dimension(self) -> int:
        return int(self.problem.get("dimension", 1))

    def initial_profile(self) -> InitialProfile:
        if self.profile is None:
            return InitialProfile(kind="trapezoid" if self.dimension == 1 else "l_shape")
        return InitialProfile.from_dict(self.profile)

    def qite_config(self) -> QiteConfig:
        return _from_dict(QiteConfig, self.qite)

    def varqte_config(self) -> VarqteConfig:
        data = dict(self.varqte)
        fit = {"seed": int(self.seed)}
        for key in ("restarts", "tol", "accept", "max_iter"):
            if key in data:
                fit[key] = data.pop(key)
        cfg = _from_dict(VarqteConfig, data)
        cfg.fit = _from_dict(FitConfig, fit)
        return cfg

    def avqds_config(self) -> AvqdsConfig:
        return _from_dict(AvqdsConfig, self.avqds)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["profile"] = self.initial_profile().to_dict()
        data.pop("output")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return _from_dict(cls, data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


def build_problem(config: RunConfig) -> Problem:
    cfg = config.problem_config()
    profile = config.initial_profile()
    if isinstance(cfg, Transport1DConfig):
        return problem_1d(cfg, profile)
    return problem_2d(cfg, profile)


def _dns_record(problem: Problem, dt: float, total: float) -> RunRecord:
    steps = step_count(dt, total)
    record = RunRecord(method="dns", columns=["step", "t", "infidelity", "norm"])
    for k, (_, norm) in enumerate(problem.reference(steps, dt)):
        record.append(step=k, t=k * dt, infidelity=0.0, norm=norm)
    record.resources = ResourceCount()
    return record


def run(config: RunConfig) -> RunRecord:
    """Execute one configured run and persist it when ``output`` is set."""
    problem = build_problem(config)
    if config.method == "dns":
        record = _dns_record(problem, config.dt, config.T)
    elif config.method == "qite":
        opts = config.qite_config()
        pool = QitePool.full(problem.qubits, opts.domain)
        record = qite_run(problem, pool, config.dt, config.T, opts.rcond, opts.exact_norm, opts.connectivity)
    elif config.method == "varqte":
        record = varqte_run(problem, config.dt, config.T, config.varqte_config())
    else:
        record = avqds_run(problem, config.dt, config.T, config.avqds_config())
    record.config = config.to_dict()
    if config.output:
        record.write(config.output)
    return record


def sample_shots(state: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Multinomial measurement histogram over basis indices."""
    if shots < 1:
        raise ConfigError(f"shots must be at least 1, got {shots}")
    probs = np.abs(np.asarray(state)) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ConfigError(f"state is not normalized (norm^2 = {total:.12g})")
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, probs / total)


def _set_path(data: dict, path: str, value) -> None:
    keys = path.split(".")
    target = data
    for key in keys[:-1]:
        target = target.setdefault(key, {})
    target[keys[-1]] = value


def grid_points(grid: dict) -> list[dict]:
    """Cartesian product of ``{dotted.path: [values]}``; empty grid gives no points."""
    if not grid:
        return []
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _run_point(args):
    base, overrides, output = args
    data = copy.deepcopy(base)
    for path, value in overrides.items():
        _set_path(data, path, value)
    if output is not None:
        data["output"] = output
    try:
        return overrides, run(RunConfig.from_dict(data)), None
    except AdvqError as exc:
        return overrides, None, f"{type(exc).__name__}: {exc}"


@dataclass
class SweepResult:
    overrides: dict
    record: RunRecord | None
    error: str | None

    @property
    def final_infidelity(self) -> float | None:
        return None if self.record is None else self.record.final["infidelity"]


def sweep(grid: dict, base: RunConfig | dict | None = None, workers: int = 1,
          output: str | None = None) -> list[SweepResult]:
    """Run every grid point; failures are recorded and the sweep continues."""
    if isinstance(base, RunConfig):
        base_dict = base.to_dict()
        output = output or base.output
    else:
        base_dict = dict(base or {})
    points = grid_points(grid)
    jobs = []
    for index, overrides in enumerate(points):
        sub = None if output is None else str(Path(output) / f"run_{index:03d}")
        jobs.append((base_dict, overrides, sub))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(job) for job in jobs]
    out = [SweepResult(*r) for r in results]
    if output is not None and out:
        Path(output).mkdir(parents=True, exist_ok=True)
        (Path(output) / "summary.csv").write_text(summary_csv(out), encoding="utf-8")
    return out


def summary_csv(results: list[SweepResult]) -> str:
    keys = list(results[0].overrides) if results else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys + ["final_infidelity", "error"])
    for res in results:
        final = "" if res.record is None else format_value(float(res.final_infidelity))
        writer.writerow([format_value(res.overrides[k]) for k in keys] + [final, res.error or ""])
    return buf.getvalue()


def field_series(problem: Problem, times) -> list[tuple[float, np.ndarray, float]]:
    """Physical field ``scale * exp(A t) c0`` with its norm relative to ``t = 0``."""
    out = []
    for t, (state, norm) in zip(times, reference_series(problem.operator, problem.initial, times)):
        out.append((float(t), problem.scale * norm * state, norm))
    return out
