"""Command line interface: ``commuter-sir <command> ...``.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ConvergenceError, ValidationError
from .experiments import (CSV_FORMAT, SweepGrid, emit_figure_data, load_scenario_file,
                          reproduce_tables, run_sweep)
from .model import GROUPS
from .ngm import epidemic_threshold, threshold_report
from .simulate import simulate_seeded
from .threshold_analysis import approx_threshold, minimize_threshold

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_threshold(args):
    sf = load_scenario_file(args.scenario)
    report = threshold_report(sf.scenario).to_dict()
    r_tilde, a_tilde = approx_threshold(sf.scenario)
    report.update(r12_tilde=r_tilde, alpha_tilde=a_tilde, warnings=list(sf.warnings))
    _print_json(report)


def cmd_sweep(args):
    sf = load_scenario_file(args.scenario)
    grid = SweepGrid.parse(args.grid) if args.grid else (sf.sweep or SweepGrid())
    sweep = run_sweep(sf.scenario, grid.p1_points, grid.p2_points, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [sweep.to_csv(out / "sweep.csv")]
    paths += emit_figure_data(sweep, out, stem="figure", title=sf.name or "R12 versus p1")
    p1, p2, r = sweep.argmin()
    _print_json({
        "grid": [grid.p1_points, grid.p2_points],
        "rows": len(sweep),
        "max_gap": sweep.max_gap,
        "grid_argmin_exact": {"p1": p1, "p2": p2, "r12": r},
        "files": [str(p) for p in paths],
        "warnings": list(sf.warnings),
    })


def cmd_minimize(args):
    sf = load_scenario_file(args.scenario)
    result = minimize_threshold(sf.scenario).to_dict()
    result["warnings"] = list(sf.warnings)
    _print_json(result)


def cmd_simulate(args):
    sf = load_scenario_file(args.scenario)
    scenario = sf.scenario
    t_end = args.t_end if args.t_end is not None else 500.0 / scenario.epidemic.gamma
    traj = simulate_seeded(scenario, args.seed_fraction, t_end, n_out=args.points)
    header = ["t"] + [f"{c}_{g}" for c in "SIR" for g in GROUPS]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, y in zip(traj.times, traj.y):
            writer.writerow([CSV_FORMAT.format(t)] + [CSV_FORMAT.format(v) for v in y])
    total_i = traj.total_infected
    k = int(np.argmax(total_i))
    drift = np.abs(traj.home_totals - scenario.home_totals).max() / scenario.home_totals.sum()
    _print_json({
        "r12": epidemic_threshold(scenario),
        "t_end": t_end,
        "samples": len(traj),
        "peak_total_infected": float(total_i[k]),
        "peak_time": float(traj.times[k]),
        "final_total_recovered": float(traj.R[-1].sum()),
        "max_relative_conservation_drift": float(drift),
        "file": str(args.out),
    })


def cmd_reproduce(args):
    report = reproduce_tables(out_dir=args.out, grid=args.grid, threads=args.threads)
    summary = {}
    for case, r in report["cases"].items():
        summary[case] = {
            "max_gap": r["max_gap"],
            "reference_max_gap": r["reference_max_gap"],
            "gap_within_tolerance": r.get("gap_within_tolerance"),
            "shape": r["shape_at_N2c_eq_N2"],
            "p1_star": r["minimizer"]["p1_star"],
            "p2_star": r["minimizer"]["p2_star"],
            "r12_min": r["minimizer"]["r12_min"],
            "warnings": r["warnings"],
        }
    _print_json({"out": str(args.out), "cases": summary})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commuter-sir",
        description="Epidemic threshold of the two-patch SIR model with commuters.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="print the threshold report as JSON")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="thresholds over a (p1, p2) grid")
    p.add_argument("scenario")
    p.add_argument("--grid", help="P1xP2 grid points (default: from file, else 201x201)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("minimize", help="commuter numbers minimizing the threshold")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("simulate", help="integrate the ODE system from a seeded state")
    p.add_argument("scenario")
    p.add_argument("--seed-fraction", type=float, default=1e-4)
    p.add_argument("--t-end", type=float, default=None, help="default 500/gamma")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce-paper", help="run the three reference cases")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
