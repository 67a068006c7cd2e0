"""Command-line entry point: ``simulate``, ``vl-map``, ``verify`` and ``reproduce-paper``.

Exit codes
    0  success
    2  invalid or missing config, bad flags, unmet check preconditions
    3  numerical abort (norm drift during propagation)
    4  auxiliary initial state incompatible with the reference
    5  a verification check failed
    6  VL construction finished but exceeded its sigma_z tolerance
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .model import ConfigError, ExperimentSpec, load_experiment, serialize_experiment
from .propagator import NumericalAbort, Trajectory, propagate
from .verify import CHECKS, PreconditionError, run_check, run_suite
from .vlmap import IncompatibleInitialState, VLResult, vl_from_spec

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_INCOMPATIBLE = 4
EXIT_VERIFY_FAILED = 5
EXIT_VL_TOLERANCE = 6

logger = logging.getLogger("qubit_tddft")


# -- trajectory files --------------------------------------------------------


def trajectory_columns(traj: Trajectory) -> list[str]:
    n = traj.n_qubits
    cols = ["t"] + [f"sigma_z_{q + 1}" for q in range(n)]
    cols += [f"j_{lab}" for lab in traj.bond_labels] + [f"T_{lab}" for lab in traj.bond_labels]
    return cols + [f"h_{q + 1}" for q in range(n)]


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    """Header row plus one row per grid point, 17 significant digits (exact round trip)."""
    if traj.sigma_z is None or traj.currents is None or traj.kinetics is None:
        raise ValueError("CSV output needs sigma_z, currents and kinetics recorded")
    data = np.column_stack([traj.times, traj.sigma_z, traj.currents, traj.kinetics, traj.field_values])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(trajectory_columns(traj)), comments="")


def read_trajectory_csv(path: Path) -> Trajectory:
    """Inverse of :func:`write_trajectory_csv`; norms are not stored and come back as NaN."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = sum(c.startswith("sigma_z_") for c in header)
    labels = [c[2:] for c in header if c.startswith("j_")]
    nb = len(labels)
    cuts = np.cumsum([1, n, nb, nb])
    return Trajectory(
        times=data[:, 0],
        sigma_z=data[:, 1:cuts[1]],
        currents=data[:, cuts[1]:cuts[2]],
        kinetics=data[:, cuts[2]:cuts[3]],
        field_values=data[:, cuts[3]:],
        norms=np.full(len(data), np.nan),
        bond_labels=labels,
    )


def config_digest(spec: ExperimentSpec) -> str:
    return hashlib.sha256(serialize_experiment(spec).encode()).hexdigest()


def write_manifest(out: Path, command: str, spec: ExperimentSpec | None, outputs: list[Path], started: float) -> Path:
    manifest = {
        "command": command,
        "config_digest": config_digest(spec) if spec is not None else None,
        "grid": {"t_end": spec.t_end, "n_steps": spec.n_steps, "dt": spec.dt} if spec is not None else None,
        "outputs": [p.name for p in outputs],
        "wall_time_s": time.perf_counter() - started,
        "version": __version__,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


# -- commands ----------------------------------------------------------------


def _load(args) -> ExperimentSpec:
    spec = load_experiment(args.config)
    if args.steps_override is not None or args.dt_override is not None:
        spec = spec.with_grid(n_steps=args.steps_override, dt=args.dt_override)
    return spec


def _vl_outputs(out: Path, result: VLResult, prefix: str = "") -> list[Path]:
    nb = result.aux_trajectory.currents.shape[1]
    paths = [out / f"{prefix}reference.csv", out / f"{prefix}auxiliary.csv"]
    write_trajectory_csv(paths[0], result.reference_trajectory)
    write_trajectory_csv(paths[1], result.aux_trajectory)
    fields = out / f"{prefix}aux_fields.csv"
    n = result.aux_fields.shape[1]
    np.savetxt(fields, np.column_stack([result.aux_trajectory.times, result.aux_fields]), fmt="%.17g",
               delimiter=",", header=",".join(["t"] + [f"h_{q + 1}" for q in range(n)]), comments="")
    summary = {
        "max_sigma_deviation": result.max_sigma_deviation,
        "max_current_deviation": result.max_current_deviation,
        "tolerance": result.tolerance,
        "success": result.success,
        "field_update": result.field_update,
        "regularization_counts": dict(zip(result.aux_trajectory.bond_labels, result.regularization_counts(nb))),
    }
    paths += [fields, _write_json(out / f"{prefix}deviation_summary.json", summary)]
    return paths


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    spec = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj = propagate(spec)
    csv = out / "trajectory.csv"
    write_trajectory_csv(csv, traj)
    write_manifest(out, "simulate", spec, [csv], started)
    print(f"wrote {csv} ({len(traj.times)} rows)")
    return EXIT_OK


def cmd_vlmap(args) -> int:
    started = time.perf_counter()
    spec = _load(args)
    if spec.vl is None:
        raise ConfigError(f"{args.config}: config has no 'vl' block")
    if args.tolerance is not None:
        spec = replace(spec, vl=replace(spec.vl, tolerance=args.tolerance))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = vl_from_spec(spec, field_update=args.field_update)
    paths = _vl_outputs(out, result)
    write_manifest(out, "vl-map", spec, paths, started)
    print(f"max sigma_z deviation {result.max_sigma_deviation:.3e} (tolerance {result.tolerance:g})")
    if not result.success:
        print("VL tolerance exceeded", file=sys.stderr)
        return EXIT_VL_TOLERANCE
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = _load(args)
    if args.check:
        reports = run_check(args.check, spec, seed=args.seed)
    else:
        reports = run_suite(args.suite, seed=args.seed, spec=spec)
    path = _write_json(out / "verify_report.json", [r.to_json() for r in reports])
    write_manifest(out, "verify", spec, [path], started)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check}: residual {r.residual:.3e} (threshold {r.threshold:.3e})")
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"check failed: {failed[0].check}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _write_dat(path: Path, header: str, columns) -> Path:
    np.savetxt(path, np.column_stack(columns), fmt="%.10g", header=header)
    return path


def cmd_reproduce(args) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = load_experiment("paper_fig3_xy")
    if args.steps_override is not None or args.dt_override is not None:
        spec = spec.with_grid(n_steps=args.steps_override, dt=args.dt_override)
    result = vl_from_spec(spec)
    paths = _vl_outputs(out, result)
    ref, aux = result.reference_trajectory, result.aux_trajectory
    t = ref.times
    paths += [
        _write_dat(out / "panel_a.dat", "t h_1 h_2 h_3 (reference pulses)", [t, ref.field_values]),
        _write_dat(out / "panel_b.dat", "t sigma_z_1 sigma_z_2 sigma_z_3 (reference)", [t, ref.sigma_z]),
        _write_dat(out / "panel_c.dat", "t h'_1 h'_2 h'_3 (auxiliary fields)", [t, result.aux_fields]),
        _write_dat(out / "panel_d.dat", "t sigma'_z_1 sigma'_z_2 sigma'_z_3 (auxiliary)", [t, aux.sigma_z]),
    ]
    write_manifest(out, "reproduce-paper", spec, paths, started)
    print(f"wrote panels a-d to {out}; max sigma_z deviation {result.max_sigma_deviation:.3e}")
    return EXIT_OK if result.success else EXIT_VL_TOLERANCE


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubit-tddft",
                                     description="Exact dynamics and inverse field maps for qubit chains.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_default=None):
        p.add_argument("--config", default=config_default, required=config_default is None,
                       help="config file path or shipped config name")
        p.add_argument("--out", default="runs", help="output directory")
        p.add_argument("--dt-override", type=float, default=None)
        p.add_argument("--steps-override", type=int, default=None)

    p = sub.add_parser("simulate", help="forward propagation")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("vl-map", help="construct auxiliary fields for a config with a vl block")
    common(p)
    p.add_argument("--tolerance", type=float, default=None, help="override the sigma_z tolerance")
    p.add_argument("--field-update", choices=("step", "stage"), default=None)
    p.set_defaults(func=cmd_vlmap)

    p = sub.add_parser("verify", help="run verification checks")
    common(p, config_default="paper_fig3")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--suite", default="default")
    group.add_argument("--check", choices=CHECKS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce-paper", help="Heisenberg to XY demonstration with gnuplot panels")
    p.add_argument("--out", default="runs/reproduce")
    p.add_argument("--dt-override", type=float, default=None)
    p.add_argument("--steps-override", type=int, default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "steps_override", None) is not None and args.steps_override < 1:
        print("error: --steps-override must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except IncompatibleInitialState as exc:
        print(f"error: incompatible auxiliary initial state: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except NumericalAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, PreconditionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
