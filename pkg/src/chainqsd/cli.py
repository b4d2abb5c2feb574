"""Command-line front end: run scenario files, calibrate reservoirs
against the memoryless reference, and diff emitted run directories.

Exit codes: 0 success, 1 validation/usage error, 2 solver failure,
3 calibration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import (
    CalibrationError,
    ChainQsdError,
    HalfLifeNotFoundError,
    ScenarioError,
    SolverError,
)
from .nonmarkovian import BACKENDS
from .scenario import (
    calibrate,
    compare_dirs,
    emit,
    envelope_half_life,
    load_scenario,
    reference_half_life_for,
    run_scenario,
    scenario_hash,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_CALIBRATION = 3


def _cmd_run(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    if args.validate:
        tags = ", ".join(tag for tag, _ in sc.reservoirs)
        print(f"scenario ok: hash {scenario_hash(sc)}")
        print(f"  chain: {sc.chain.n_qubits} site(s), coupling {sc.chain.coupling!r}")
        print(f"  reservoirs: {tags}")
        print(f"  measures: {', '.join(sc.measures) if sc.measures else '(none)'}")
        print(f"  grid: {sc.n_samples} samples on [0, {sc.t_end!r}]")
        print(f"  backend: {args.backend or sc.backend}")
        return EXIT_OK
    if args.out is None:
        print("error: run needs --out <dir> (or --validate)", file=sys.stderr)
        return EXIT_VALIDATION
    record = run_scenario(sc, backend=args.backend)
    files = emit(record, args.out)
    print(f"wrote {len(files)} files to {args.out}")
    if record.failed_tags:
        for tag in record.failed_tags:
            print(f"reservoir {tag} failed: {record.result(tag).error}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    if sc.calibration is None:
        raise ScenarioError("scenario has no calibration block")
    sd = sc.reservoir(args.reservoir)
    cal = sc.calibration
    try:
        reference = reference_half_life_for(sc)
    except HalfLifeNotFoundError as exc:
        raise CalibrationError(
            f"the reference trajectory never reaches half within t_end={sc.t_end!r}: {exc}"
        ) from exc
    calibrated = calibrate(
        sd,
        reference,
        cal.free_parameter,
        cal.bracket,
        cal.rel_tol,
        cfg=sc.chain,
        t_end=sc.t_end,
        n_samples=sc.n_samples,
        backend=args.backend,
        solver=sc.solver,
    )
    value = float(getattr(calibrated, cal.free_parameter))
    achieved = envelope_half_life(
        sc.chain, calibrated, t_end=sc.t_end, n_samples=sc.n_samples,
        backend=args.backend, solver=sc.solver,
    )
    print(f"reservoir: {args.reservoir}")
    print(f"free_parameter: {cal.free_parameter}")
    print(f"value: {value!r}")
    print(f"reference_half_life: {reference!r}")
    print(f"achieved_half_life: {achieved!r}")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    for d in (args.dir_a, args.dir_b):
        if not Path(d).is_dir():
            raise ScenarioError(f"{d} is not a directory")
    diffs = compare_dirs(args.dir_a, args.dir_b, args.tol)
    if diffs:
        for line in diffs:
            print(line)
        print(f"{len(diffs)} difference(s) beyond tolerance {args.tol!r}")
        return EXIT_VALIDATION
    print("directories match")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainqsd",
        description="Damped-chain simulator: reference vs structured-reservoir "
        "dynamics and the state distance between them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file and emit tables")
    p_run.add_argument("scenario", help="scenario document (YAML)")
    p_run.add_argument("--out", default=None, help="output directory for the run record")
    p_run.add_argument(
        "--backend", choices=BACKENDS, default=None,
        help="override the scenario's solver backend",
    )
    p_run.add_argument(
        "--validate", action="store_true",
        help="parse and validate only; nothing is solved or written",
    )
    p_run.set_defaults(func=_cmd_run)

    p_cal = sub.add_parser(
        "calibrate", help="tune one reservoir to the reference half-life"
    )
    p_cal.add_argument("scenario", help="scenario document with a calibration block")
    p_cal.add_argument("--reservoir", required=True, help="tag of the reservoir to tune")
    p_cal.add_argument(
        "--backend", choices=BACKENDS, default="laplace",
        help="backend for the half-life sweeps (default: laplace, the fast one)",
    )
    p_cal.set_defaults(func=_cmd_calibrate)

    p_cmp = sub.add_parser("compare", help="table-level diff of two run directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument(
        "--tol", type=float, default=1e-9,
        help="max abs per-sample difference tolerated (default 1e-9)",
    )
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ChainQsdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
