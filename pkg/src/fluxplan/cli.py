"""Command-line front end: plan / simulate / run / report."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .errors import FluxplanError, NotConverged, ScenarioError
from .scenario import (
    load_scenario,
    read_path_csv,
    run_scenario,
    write_path_csv,
)
from .sim import run_tracking, write_sim_csv
from .trajectory import filter_path, parameterize, write_trajectory_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3


def _cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario)
    out = Path(args.out) if args.out else scenario.output_dir
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    from .fg_planner import plan_fg
    from .ls_planner import plan_ls

    metrics = {}
    for method in scenario.methods:
        try:
            if method == "ls":
                path = plan_ls(scenario.start_quad, scenario.target.as_point_charge(), scenario.ls_cfg)
            else:
                path = plan_fg(scenario.start_quad, scenario.target, scenario.fg_cfg)
            converged = True
        except NotConverged as exc:
            path = exc.path
            converged = False
            status = EXIT_NOT_CONVERGED
        sub = out / method if len(scenario.methods) > 1 else out
        sub.mkdir(parents=True, exist_ok=True)
        write_path_csv(path, sub / "path.csv")
        metrics[method] = {
            "combined_length_m": path.combined_length,
            "iterations": len(path.snapshots) - 1,
            "converged": converged,
        }
        if not args.quiet:
            print(f"{method}: {metrics[method]['combined_length_m']:.1f} m, converged={converged}")
    (out / "metrics.json").write_text(json.dumps({"per_method": metrics}, indent=2) + "\n")
    return status


def _cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    out = Path(args.out) if args.out else scenario.output_dir
    out.mkdir(parents=True, exist_ok=True)
    path = read_path_csv(args.path)
    filtered = filter_path(path, scenario.min_spacing)
    traj = parameterize(filtered, scenario.limits, scenario.dt)
    sim = run_tracking(traj, scenario.pid, scenario.limits)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_sim_csv(sim, out / "sim.csv")
    if not args.quiet:
        print(
            f"duration {traj.duration:.2f} s, max tracking error "
            f"{sim.max_position_error:.3f} m"
        )
    return EXIT_OK


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out = Path(args.out) if args.out else None
    metrics = run_scenario(scenario, out_dir=out, quiet=args.quiet)
    if not all(m["converged"] for m in metrics["per_method"].values()):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def compare_report(metric_files) -> tuple[str, list]:
    """Build a combined-path-length table (rows: target, columns: method)."""
    if not metric_files:
        raise ScenarioError("no metrics files given")
    rows = {}
    methods = []
    for fname in metric_files:
        try:
            data = json.loads(Path(fname).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"{fname}: {exc}") from exc
        if "per_method" not in data or "target_m" not in data:
            raise ScenarioError(f"{fname}: missing per_method/target_m keys")
        target = tuple(data["target_m"])
        for method, m in data["per_method"].items():
            if "combined_length_m" not in m or m["combined_length_m"] is None:
                raise ScenarioError(f"{fname}: empty combined_length for method {method}")
            if method not in methods:
                methods.append(method)
            rows.setdefault(target, {})[method] = m["combined_length_m"]

    header = ["target_m"] + [f"{m}_length_m" for m in methods]
    table_rows = [header]
    lines = ["  ".join(f"{h:>18}" for h in header)]
    for target in rows:
        label = "(" + ", ".join(f"{x:g}" for x in target) + ")"
        cells = [label]
        for m in methods:
            value = rows[target].get(m)
            cells.append("" if value is None else f"{value:.1f}")
        table_rows.append(cells)
        lines.append("  ".join(f"{c:>18}" for c in cells))
    return "\n".join(lines), table_rows


def _cmd_report(args) -> int:
    text, table = compare_report(args.metrics)
    print(text)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxplan",
        description="Formation path planning via flux maximization, with "
        "time parameterization and tracking simulation.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="run the planner(s) only")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--out", help="output directory (default from scenario)")
    p_plan.set_defaults(func=_cmd_plan)

    p_sim = sub.add_parser("simulate", help="parameterize and simulate an existing path.csv")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--path", required=True, help="path.csv from a previous plan")
    p_sim.add_argument("--out")
    p_sim.set_defaults(func=_cmd_simulate)

    p_run = sub.add_parser("run", help="end-to-end: plan, parameterize, simulate")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out")
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("report", help="combined-path-length comparison table")
    p_rep.add_argument("metrics", nargs="+", help="metrics.json files")
    p_rep.add_argument("--out", help="also write the table as CSV")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FluxplanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
