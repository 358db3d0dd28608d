"""Command-line interface: ``advq decompose | dns | simulate | sweep | resources | grid dump``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .hamiltonian import Transport1DConfig, hamiltonian_1d, shift_components, term_count_formula
from .problem import step_count
from .record import RunRecord, format_value
from .resources import count_run, structural_depth
from .runner import RunConfig, build_problem, field_series, run, summary_csv, sweep
from .transport import deinterleave

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def parse_range(text: str) -> list:
    """``"2..12"``, ``"2..12:2"`` or ``"2,4,8"`` to a list of numbers."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(v) for v in span.split(".."))
            return list(range(lo, hi + 1, int(step) if step else 1))
        return [json.loads(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}") from None


def _add_problem_flags(p: argparse.ArgumentParser, qubits: bool = True) -> None:
    p.add_argument("--config", help="JSON run configuration; flags override its fields")
    p.add_argument("--dimension", type=int, choices=(1, 2))
    if qubits:
        p.add_argument("--qubits", type=int, help="qubits (1D) or qubits per axis (2D)")
    p.add_argument("--pe", type=float, help="Peclet number (1D)")
    p.add_argument("--gamma", type=float, help="diffusion coefficient (2D)")
    p.add_argument("--profile", choices=("trapezoid", "l_shape"))
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float, dest="total")
    p.add_argument("--seed", type=int)


def _add_method_flags(p: argparse.ArgumentParser, layers: bool = True) -> None:
    p.add_argument("--method", choices=("dns", "qite", "varqte", "avqds"))
    if layers:
        p.add_argument("--layers", type=int, help="VarQTE ansatz layers")
    p.add_argument("--restarts", type=int, help="VarQTE fit restarts")
    p.add_argument("--pool-weight", type=int, help="AVQDS maximum Pauli weight")
    p.add_argument("--connectivity", choices=("all-to-all", "linear-chain"), help="AVQDS pool supports")
    p.add_argument("--dmax", type=float, help="AVQDS distance threshold")
    p.add_argument("--max-adds", type=int, help="AVQDS additions per step")
    p.add_argument("--domain", type=int, help="QITE maximum generator span")
    p.add_argument("--exact-norm", action="store_true", default=None, help="QITE exact norm factor")
    p.add_argument("--out", help="output directory")


def config_from_args(args) -> RunConfig:
    data = RunConfig.from_json(args.config).to_dict() if getattr(args, "config", None) else RunConfig().to_dict()
    if not getattr(args, "config", None):
        data["profile"] = None
    problem = data["problem"]
    if args.dimension is not None and args.dimension != problem.get("dimension", 1):
        problem = {"dimension": args.dimension}
        problem.update({"qubits": 4, "peclet": 32.0} if args.dimension == 1 else {"qubits_per_axis": 4})
        data["profile"] = None
    if getattr(args, "qubits", None) is not None:
        problem["qubits" if problem.get("dimension", 1) == 1 else "qubits_per_axis"] = args.qubits
    if args.pe is not None:
        problem["peclet"] = args.pe
    if args.gamma is not None:
        problem["gamma"] = args.gamma
    data["problem"] = problem
    if args.profile is not None:
        data["profile"] = {"kind": args.profile}
    for key, attr in (("dt", "dt"), ("T", "total"), ("seed", "seed"), ("method", "method")):
        value = getattr(args, attr, None)
        if value is not None:
            data[key] = value
    sections = {
        "varqte": {"layers": "layers", "restarts": "restarts"},
        "avqds": {"pool_weight": "pool_weight", "connectivity": "connectivity", "d_max": "dmax",
                  "max_adds_per_step": "max_adds"},
        "qite": {"domain": "domain", "exact_norm": "exact_norm"},
    }
    for section, mapping in sections.items():
        for key, attr in mapping.items():
            value = getattr(args, attr, None)
            if value is not None:
                data[section][key] = value
    if getattr(args, "out", None):
        data["output"] = args.out
    return RunConfig.from_dict(data)


def cmd_decompose(args) -> int:
    cfg = Transport1DConfig(args.n, args.pe)
    op = hamiltonian_1d(cfg)
    components = [{"component": label, "terms": len(part)} for label, part in shift_components(args.n)]
    out = {
        "qubits": args.n,
        "peclet": args.pe,
        "terms": op.to_json(),
        "term_count": len(op),
        "formula_count": term_count_formula(args.n),
        "shift_components": components,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_dns(args) -> int:
    config = config_from_args(args)
    problem = build_problem(config)
    steps = step_count(config.dt, config.T)
    times = np.arange(steps + 1) * config.dt
    series = field_series(problem, times)
    dim = problem.initial.shape[0]
    stream = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["t", "norm"] + [f"c{k}" for k in range(dim)])
        for t, values, norm in series:
            writer.writerow([format_value(t), format_value(norm)] + [format_value(float(v)) for v in values])
    finally:
        if args.out:
            stream.close()
    return EXIT_OK


def _summary(record: RunRecord) -> dict:
    out = {"method": record.method, "steps": len(record.rows) - 1,
           "final_infidelity": record.final["infidelity"],
           "max_infidelity": max(record.column("infidelity"))}
    if record.resources is not None:
        out["resources"] = record.resources.to_dict()
    if "n_params" in record.columns:
        out["n_params"] = record.final["n_params"]
    return out


def cmd_simulate(args) -> int:
    record = run(config_from_args(args))
    print(json.dumps(_summary(record), indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = config_from_args(args)
    if args.method is None and not args.config:
        base.method = "varqte"
    grid = {}
    if args.layers_range:
        grid["varqte.layers"] = parse_range(args.layers_range)
    if args.qubits_range:
        grid["problem.qubits"] = parse_range(args.qubits_range)
    if args.methods:
        grid["method"] = args.methods.split(",")
    results = sweep(grid, base, workers=args.workers, output=args.out)
    sys.stdout.write(summary_csv(results))
    return EXIT_OK


def cmd_resources(args) -> int:
    path = Path(args.run)
    directory = path.parent if path.is_file() else path
    try:
        record = RunRecord.load(directory)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load run from {args.run}: {exc}") from None
    counts = count_run(record.trace, args.connectivity)
    out = counts.to_dict()
    out["structural_depth"] = structural_depth(record.trace)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_grid_dump(args) -> int:
    config = config_from_args(args)
    problem = build_problem(config)
    t = args.t or 0.0
    (_, values, _), = field_series(problem, [t])
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["x", "y", "C"])
    cfg = config.problem_config()
    if config.dimension == 1:
        for i, v in enumerate(values):
            writer.writerow([format_value(i * cfg.dx), "0", format_value(float(v))])
    else:
        for k, v in enumerate(values):
            i, j = deinterleave(k, cfg.qubits_per_axis)
            writer.writerow([format_value(float(cfg.x(i))), format_value(float(cfg.y(j))), format_value(float(v))])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advq", description="Quantum-algorithm simulations of advection-diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Pauli decomposition of the 1D Hamiltonian")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pe", type=float, required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("dns", help="exact reference evolution as CSV")
    _add_problem_flags(p)
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_dns, method=None)

    p = sub.add_parser("simulate", help="run one method and write a run directory")
    _add_problem_flags(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid of runs with a summary CSV")
    _add_problem_flags(p, qubits=False)
    _add_method_flags(p, layers=False)
    p.add_argument("--layers", dest="layers_range", help="e.g. 2..12:2")
    p.add_argument("--qubits", dest="qubits_range", help="e.g. 3..6")
    p.add_argument("--methods", help="comma-separated methods")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep, qubits=None, layers=None)

    p = sub.add_parser("resources", help="native gate counts of a saved run")
    p.add_argument("run", help="run directory or its manifest.json")
    p.add_argument("--connectivity", choices=("linear", "all-to-all"), default="linear")
    p.set_defaults(func=cmd_resources)

    grid = sub.add_parser("grid", help="grid utilities")
    grid_sub = grid.add_subparsers(dest="grid_command", required=True)
    p = grid_sub.add_parser("dump", help="(x, y, C) CSV of the initial or evolved field")
    _add_problem_flags(p)
    p.add_argument("--t", type=float, help="evolve with the exact reference to this time")
    p.set_defaults(func=cmd_grid_dump, method=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
