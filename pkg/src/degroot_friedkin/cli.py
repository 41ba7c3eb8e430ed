"""Command-line entry point.

    degroot-friedkin validate C1.json C2.csv
    degroot-friedkin simulate --config scenario.json [--out DIR] [--seed N] [--issues N]
    degroot-friedkin fixed-point --config scenario.json --phase 1 [--tol 1e-12]
    degroot-friedkin verify --config scenario.json

Exit codes: 0 success, 1 check or convergence failure, 2 input error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis
from .errors import ConfigError, MatrixFormatError, MatrixStructureError, PreconditionError, ScheduleError
from .matrixcore import dump_json, load_matrix
from .scenario import load_config
from .switching import ARBITRARY, detect_periodic_orbit, find_periodic_orbit, simulate

log = logging.getLogger("degroot_friedkin")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
INPUT_ERRORS = (ConfigError, MatrixFormatError, MatrixStructureError, PreconditionError, ScheduleError, OSError)


def _emit(obj, out_dir: Path | None, filename: str) -> str:
    text = dump_json(obj)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(text)
    sys.stdout.write(text)
    return text


def cmd_validate(args) -> int:
    reports = []
    failed = False
    for name in args.files:
        C = load_matrix(name)
        rep = C.report.to_dict()
        failed |= not rep["satisfies_assumption_1"]
        reports.append({"file": str(name), "id": C.id, **rep})
    sys.stdout.write(dump_json(reports))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed=args.seed, num_issues=args.issues, outputs=args.out)
    sched = cfg.schedule
    traj = simulate(sched, cfg.x1, cfg.num_issues)
    cfg.outputs.mkdir(parents=True, exist_ok=True)
    traj.to_csv(cfg.outputs / "trajectory.csv")

    summary = {
        "config": cfg.source.name,
        "n": sched.n,
        "num_issues": cfg.num_issues,
        "schedule": sched.describe(),
        "initial_seed": cfg.initial_seed,
        "initial_state": [float(v) for v in cfg.x1],
        "final_state": [float(v) for v in traj.final],
        "min_self_weight": float(traj.states.min()),
    }
    status = EXIT_OK
    if sched.kind != ARBITRARY:
        tol = args.tol if args.tol is not None else cfg.tolerances["orbit"]
        try:
            summary["periodicity"] = detect_periodic_orbit(traj, sched.period, tol).to_dict()
        except PreconditionError as exc:
            summary["periodicity"] = {"converged": False, "error": str(exc)}
    else:
        summary["realized_sequence"] = traj.metadata["realized_sequence"]
        summary["periodicity"] = None
    if sched.democratic:
        tol = args.tol if args.tol is not None else cfg.tolerances["democratic"]
        check = analysis.democratic_limit_check(traj, tol)
        summary["democratic_limit"] = check.to_dict()
        if not check.passed:
            status = EXIT_FAIL
    _emit(summary, cfg.outputs, "summary.json")
    return status


def cmd_fixed_point(args) -> int:
    cfg = load_config(args.config, seed=args.seed, outputs=args.out)
    if cfg.schedule.kind == ARBITRARY:
        raise ConfigError("fixed-point needs a constant or periodic schedule")
    tol = args.tol if args.tol is not None else cfg.tolerances["fixed_point"]
    report = find_periodic_orbit(cfg.schedule, cfg.x1, args.phase, tol)
    data = report.to_dict()
    data["matrix_ids"] = list(cfg.schedule.ids)
    _emit(data, cfg.outputs, f"orbit_phase{args.phase}.json")
    return EXIT_OK if report.converged else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = load_config(args.config, seed=args.seed, num_issues=args.issues, outputs=args.out)
    tols = dict(cfg.tolerances)
    if args.tol is not None:
        tols["fixed_point"] = args.tol
    results = analysis.run_suite(cfg.schedule, cfg.x1, cfg.num_issues, tols, cfg.samples, cfg.check_seed)
    ok = all(r.passed for r in results)
    for r in results:
        if not r.passed:
            log.error("check %s failed: worst violation %.3e (witness %s)", r.name, r.worst_violation,
                      r.to_dict()["witness"])
    _emit({"passed": ok, "checks": [r.to_dict() for r in results]}, cfg.outputs, "verify.json")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="degroot-friedkin",
                                     description="DeGroot-Friedkin social power under switching topologies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural report for matrix files (JSON or CSV)")
    p.add_argument("files", nargs="+", type=Path)
    p.set_defaults(func=cmd_validate)

    def scenario(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for a random-interior initial state")
        p.add_argument("--tol", type=float)
        p.set_defaults(func=func)
        return p

    scenario("simulate", cmd_simulate, "write trajectory.csv and summary.json").add_argument(
        "--issues", type=int)
    scenario("fixed-point", cmd_fixed_point, "periodic orbit through a cycle-map fixed point").add_argument(
        "--phase", type=int, default=1)
    scenario("verify", cmd_verify, "run the property suite").add_argument("--issues", type=int)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
