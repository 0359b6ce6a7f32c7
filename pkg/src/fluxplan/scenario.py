"""Scenario loading and end-to-end execution (plan -> parameterize -> simulate)."""
from __future__ import annotations

import csv
import json
import os
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NotConverged, ScenarioError
from .fg_planner import FgConfig, plan_fg
from .formation import derive_followers
from .geometry import LeaderQuad, PointCharge
from .ls_planner import LsConfig, plan_ls
from .planning import PlannedPath
from .sim import PidGains, run_tracking, write_sim_csv
from .targets import TargetModel, coc_reduce
from .trajectory import (
    DT_DEFAULT,
    MIN_SPACING_DEFAULT,
    KinematicLimits,
    filter_path,
    parameterize,
    write_trajectory_csv,
)


@dataclass
class Scenario:
    start_quad: LeaderQuad
    target: TargetModel
    methods: list  # subset of ["ls", "fg"]
    ls_cfg: LsConfig
    fg_cfg: FgConfig
    limits: KinematicLimits
    pid: PidGains
    min_spacing: float = MIN_SPACING_DEFAULT
    dt: float = DT_DEFAULT
    output_dir: Path = Path("out")
    emit_followers: bool = False
    seed: int | None = None


def _require(table, key, where):
    if key not in table:
        raise ScenarioError(f"missing key '{key}' in [{where}]")
    return table[key]


def load_scenario(path) -> Scenario:
    """Parse and validate a TOML scenario file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    start = data.get("start")
    if not start:
        raise ScenarioError("missing [start] table")
    try:
        quad = LeaderQuad.from_points(
            _require(start, "p1", "start"),
            _require(start, "p2", "start"),
            _require(start, "p3", "start"),
            _require(start, "p4", "start"),
        )
    except ValueError as exc:
        raise ScenarioError(f"[start]: {exc}") from exc

    tgt = data.get("target")
    if not tgt:
        raise ScenarioError("missing [target] table")
    variants = [k for k in ("position", "members", "distribution") if k in tgt]
    if len(variants) != 1:
        raise ScenarioError(
            f"[target] must contain exactly one of position/members/distribution, got {variants}"
        )
    seed = None
    if "position" in tgt:
        target = TargetModel.single(tgt["position"])
    elif "members" in tgt:
        target = coc_reduce(tgt["members"])
    else:
        dist = tgt["distribution"]
        for key in ("mean", "sigma", "count", "seed"):
            if key not in dist:
                raise ScenarioError(f"[target.distribution] missing '{key}'")
        seed = int(dist["seed"])
        rng = np.random.default_rng(seed)
        members = rng.normal(float(dist["mean"]), float(dist["sigma"]), size=(int(dist["count"]), 3))
        target = coc_reduce(members)

    planner = data.get("planner", {})
    method = planner.get("method", "fg")
    if method not in ("ls", "fg", "both"):
        raise ScenarioError(f"[planner] method must be ls/fg/both, got {method!r}")
    methods = ["ls", "fg"] if method == "both" else [method]

    try:
        ls_cfg = LsConfig(**planner.get("ls", {}))
        fg_cfg = FgConfig(**planner.get("fg", {}))
        limits = KinematicLimits(**data.get("limits", {}))
        pid = PidGains(**data.get("pid", {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad configuration: {exc}") from exc

    traj = data.get("trajectory", {})
    out = data.get("output", {})
    return Scenario(
        start_quad=quad,
        target=target,
        methods=methods,
        ls_cfg=ls_cfg,
        fg_cfg=fg_cfg,
        limits=limits,
        pid=pid,
        min_spacing=float(traj.get("min_spacing", MIN_SPACING_DEFAULT)),
        dt=float(traj.get("dt", DT_DEFAULT)),
        output_dir=Path(out.get("directory", "out")),
        emit_followers=bool(out.get("emit_followers", False)),
        seed=seed,
    )


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _atomic(path: Path, write_fn) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    write_fn(tmp)
    os.replace(tmp, path)


def write_path_csv(path_obj: PlannedPath, path: Path) -> None:
    """CSV schema: iteration, uav_id, px, py, pz."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "uav_id", "px", "py", "pz"])
        for it, quad in path_obj.snapshots:
            for i, p in enumerate(quad.points):
                writer.writerow([str(it), str(i)] + [f"{x:.9g}" for x in p])


def read_path_csv(path) -> PlannedPath:
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            it = int(row["iteration"])
            rows.setdefault(it, {})[int(row["uav_id"])] = [
                float(row["px"]),
                float(row["py"]),
                float(row["pz"]),
            ]
    snaps = []
    for it in sorted(rows):
        pts = np.array([rows[it][i] for i in range(4)])
        snaps.append((it, LeaderQuad(pts)))
    return PlannedPath(snapshots=snaps, converged=True)


def run_method(scenario: Scenario, method: str, out_dir: Path) -> dict:
    """Plan, parameterize and simulate one method; write its artifacts."""
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    converged = True
    charge = scenario.target.as_point_charge()
    try:
        if method == "ls":
            path = plan_ls(scenario.start_quad, charge, scenario.ls_cfg)
        else:
            path = plan_fg(scenario.start_quad, scenario.target, scenario.fg_cfg)
    except NotConverged as exc:
        path = exc.path
        converged = False

    filtered = filter_path(path, scenario.min_spacing)
    traj = parameterize(filtered, scenario.limits, scenario.dt)
    sim = run_tracking(traj, scenario.pid, scenario.limits)
    wall = time.perf_counter() - t0

    _atomic(out_dir / "path.csv", lambda p: write_path_csv(path, p))
    _atomic(out_dir / "trajectory.csv", lambda p: write_trajectory_csv(traj, p))
    _atomic(out_dir / "sim.csv", lambda p: write_sim_csv(sim, p))
    if scenario.emit_followers:
        formations = [derive_followers(q) for _, q in filtered.snapshots]
        full = np.stack([f.all_positions for f in formations])
        full_traj = parameterize(full, scenario.limits, scenario.dt)
        _atomic(out_dir / "followers.csv", lambda p: write_trajectory_csv(full_traj, p))

    final = path.final_quad
    return {
        "combined_length_m": path.combined_length,
        "final_side_lengths_m": [float(s) for s in final.side_lengths],
        "max_speed_mps": float(np.linalg.norm(traj.vel, axis=2).max()),
        "max_accel_mps2": float(np.linalg.norm(traj.acc, axis=2).max()),
        "max_tracking_error_m": sim.max_position_error,
        "iterations": len(path.snapshots) - 1,
        "converged": converged,
        "wall_time_s": wall,
    }


def run_scenario(scenario: Scenario, out_dir: Path | None = None, quiet: bool = False) -> dict:
    """Run every configured method; write metrics.json; return the metrics."""
    out_root = Path(out_dir) if out_dir is not None else scenario.output_dir
    out_root.mkdir(parents=True, exist_ok=True)
    per_method = {}
    for method in scenario.methods:
        sub = out_root / method if len(scenario.methods) > 1 else out_root
        per_method[method] = run_method(scenario, method, sub)
        if not quiet:
            m = per_method[method]
            print(
                f"{method}: combined length {m['combined_length_m']:.1f} m, "
                f"{m['iterations']} iterations, converged={m['converged']}"
            )
    first = per_method[scenario.methods[0]]
    metrics = {
        "seed": scenario.seed,
        "target_m": [float(x) for x in scenario.target.center],
        "combined_length_m": first["combined_length_m"],
        "per_method": per_method,
    }
    _atomic_write_text(out_root / "metrics.json", json.dumps(metrics, indent=2) + "\n")
    return metrics
