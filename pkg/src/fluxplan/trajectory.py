"""Time parameterization of planned paths under velocity/acceleration limits.

The synchronized multi-UAV path is treated as one arc-length curve in
R^(3n) (Catmull-Rom through the snapshots).  A forward-backward pass
over the scalar speed profile enforces the per-UAV speed cap and the
per-UAV acceleration cap including centripetal terms, with endpoints at
rest.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import InfeasiblePath
from .planning import PlannedPath

MIN_SPACING_DEFAULT = 0.25  # m
DT_DEFAULT = 0.02  # s
# Internal safety margins so sampled profiles never exceed the limits.
V_MARGIN = 0.999
A_MARGIN = 0.9975


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float = 10.0  # m/s
    a_max: float = 5.0  # m/s^2

    def __post_init__(self):
        if self.v_max <= 0 or self.a_max <= 0:
            raise ValueError("limits must be positive")


@dataclass
class Trajectory:
    """Synchronized per-UAV samples: times (T,), pos/vel/acc (T, n, 3)."""

    times: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    dt: float

    @property
    def n_uavs(self) -> int:
        return self.pos.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1])


def filter_path(path: PlannedPath, min_spacing: float = MIN_SPACING_DEFAULT) -> PlannedPath:
    """Drop snapshots closer than min_spacing (max per-UAV displacement).

    First and last snapshots are always kept.
    """
    if min_spacing <= 0:
        raise ValueError("min_spacing must be positive")
    snaps = path.snapshots
    if len(snaps) <= 2:
        return PlannedPath(snapshots=list(snaps), converged=path.converged)
    kept = [snaps[0]]
    for snap in snaps[1:-1]:
        disp = np.linalg.norm(snap[1].points - kept[-1][1].points, axis=1).max()
        if disp >= min_spacing:
            kept.append(snap)
    kept.append(snaps[-1])
    return PlannedPath(snapshots=kept, converged=path.converged)


def _as_waypoints(path) -> np.ndarray:
    if isinstance(path, PlannedPath):
        return path.positions()
    arr = np.asarray(path, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (N, n, 3) waypoints, got {arr.shape}")
    return arr


def parameterize(path, limits: KinematicLimits, dt: float = DT_DEFAULT) -> Trajectory:
    """Time-optimal-style parameterization of a synchronized path.

    `path` is a PlannedPath or an (N, n, 3) waypoint array.  Returns a
    trajectory sampled at step dt with rest-to-rest endpoints.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    waypoints = _as_waypoints(path)
    n_snap, n_uav, _ = waypoints.shape
    if n_snap < 2:
        raise ValueError("need at least 2 snapshots")
    flat = waypoints.reshape(n_snap, 3 * n_uav)

    # Chord-length knots; merge coincident snapshots.
    chord = np.linalg.norm(np.diff(flat, axis=0), axis=1)
    keep = np.concatenate([[True], chord > 1e-12])
    flat = flat[keep]
    if len(flat) < 2:
        # Degenerate stationary path: a single at-rest sample.
        p = waypoints[0]
        z = np.zeros((1, n_uav, 3))
        return Trajectory(times=np.zeros(1), pos=p[None], vel=z, acc=z.copy(), dt=dt)
    chord = np.linalg.norm(np.diff(flat, axis=0), axis=1)
    u = np.concatenate([[0.0], np.cumsum(chord)])

    # Catmull-Rom tangents on the chordal knots.
    tangents = np.empty_like(flat)
    tangents[1:-1] = (flat[2:] - flat[:-2]) / (u[2:] - u[:-2])[:, None]
    tangents[0] = (flat[1] - flat[0]) / (u[1] - u[0])
    tangents[-1] = (flat[-1] - flat[-2]) / (u[-1] - u[-2])
    spline = CubicHermiteSpline(u, flat, tangents, axis=0)

    m = int(np.clip(25 * (len(u) - 1), 800, 30000))
    u_grid = np.linspace(u[0], u[-1], m)
    xu = spline.derivative(1)(u_grid)
    xuu = spline.derivative(2)(u_grid)
    s_u = np.linalg.norm(xu, axis=1)
    s_u = np.maximum(s_u, 1e-12)
    s_grid = np.concatenate([[0.0], np.cumsum(0.5 * (s_u[1:] + s_u[:-1]) * np.diff(u_grid))])

    xp = xu / s_u[:, None]  # dx/ds
    s_uu = np.einsum("ij,ij->i", xu, xuu) / s_u
    xpp = (xuu - xp * s_uu[:, None]) / (s_u**2)[:, None]  # d2x/ds2

    fp = xp.reshape(m, n_uav, 3)
    fpp = xpp.reshape(m, n_uav, 3)
    fp_norm = np.linalg.norm(fp, axis=2)
    fp_sq = np.maximum(fp_norm**2, 1e-300)

    v_eff = V_MARGIN * limits.v_max
    a_eff = A_MARGIN * limits.a_max

    # Max velocity curve: speed cap plus curvature feasibility.
    cap_v = v_eff / np.maximum(fp_norm.max(axis=1), 1e-12)
    dot = np.einsum("ijk,ijk->ij", fp, fpp)
    perp = fpp - fp * (dot / fp_sq)[:, :, None]
    perp_norm = np.linalg.norm(perp, axis=2)
    with np.errstate(divide="ignore"):
        cap_a = np.sqrt(np.where(perp_norm > 1e-12, a_eff / np.maximum(perp_norm, 1e-12), np.inf))
    mvc = np.minimum(cap_v, cap_a.min(axis=1))
    if np.any(mvc[1:-1] <= 1e-9):
        raise InfeasiblePath("curvature demands exceed the acceleration limit at zero speed")

    fpp_sq = np.einsum("ijk,ijk->ij", fpp, fpp)

    def sdd_bounds(i: int, v: float):
        """Feasible path-acceleration interval at grid point i, speed v."""
        v2 = v * v
        a2 = fp_sq[i]
        b2 = 2.0 * v2 * dot[i]
        c2 = (v2 * v2) * fpp_sq[i] - a_eff * a_eff
        disc = np.maximum(b2 * b2 - 4.0 * a2 * c2, 0.0)
        root = np.sqrt(disc)
        upper = ((-b2 + root) / (2.0 * a2)).min()
        lower = ((-b2 - root) / (2.0 * a2)).max()
        return lower, upper

    # Forward/backward sweeps.  Each segment's constant path acceleration
    # must lie in the feasible interval at *both* endpoints (the per-UAV
    # direction vectors change along the segment); iterate the pair of
    # sweeps to a fixed point since lowering one speed can tighten the
    # realized acceleration of a neighboring segment.
    v = mvc.copy()
    v[0] = 0.0
    v[-1] = 0.0
    seg = np.diff(s_grid)
    for _ in range(6):
        prev = v.copy()
        for i in range(m - 1):
            ds = seg[i]
            _, up = sdd_bounds(i, v[i])
            cand = min(np.sqrt(max(v[i] ** 2 + 2.0 * up * ds, 0.0)), v[i + 1])
            _, up_j = sdd_bounds(i + 1, cand)
            cand = np.sqrt(max(v[i] ** 2 + 2.0 * min(up, up_j) * ds, 0.0))
            v[i + 1] = min(v[i + 1], cand)
        for i in range(m - 2, -1, -1):
            ds = seg[i]
            lo, _ = sdd_bounds(i + 1, v[i + 1])
            cand = min(np.sqrt(max(v[i + 1] ** 2 - 2.0 * lo * ds, 0.0)), v[i])
            lo_i, _ = sdd_bounds(i, cand)
            cand = np.sqrt(max(v[i + 1] ** 2 - 2.0 * max(lo, lo_i) * ds, 0.0))
            v[i] = min(v[i], cand)
        if np.max(np.abs(v - prev)) < 1e-10:
            break

    def sample(v_profile: np.ndarray) -> Trajectory:
        # Time grid: exact for piecewise-constant path acceleration.
        pair = v_profile[:-1] + v_profile[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            dt_seg = np.where(pair > 0, 2.0 * seg / np.maximum(pair, 1e-300), 0.0)
        t_grid = np.concatenate([[0.0], np.cumsum(dt_seg)])
        total = float(t_grid[-1])

        times = np.arange(0.0, total, dt)
        if total - (times[-1] if len(times) else 0.0) > 1e-12 or len(times) == 0:
            times = np.concatenate([times, [total]])

        s_t = np.interp(times, t_grid, s_grid)
        v_t = np.interp(times, t_grid, v_profile)
        # Piecewise-constant path acceleration, exact for the profile above.
        sdd_seg = np.diff(v_profile**2) / (2.0 * np.maximum(seg, 1e-300))
        idx = np.clip(np.searchsorted(t_grid, times, side="right") - 1, 0, m - 2)
        sdd_t = sdd_seg[idx]
        u_t = np.interp(s_t, s_grid, u_grid)

        pos_flat = spline(u_t)
        xu_t = spline.derivative(1)(u_t)
        xuu_t = spline.derivative(2)(u_t)
        s_u_t = np.maximum(np.linalg.norm(xu_t, axis=1), 1e-12)
        xp_t = xu_t / s_u_t[:, None]
        s_uu_t = np.einsum("ij,ij->i", xu_t, xuu_t) / s_u_t
        xpp_t = (xuu_t - xp_t * s_uu_t[:, None]) / (s_u_t**2)[:, None]

        t_n = len(times)
        pos = pos_flat.reshape(t_n, n_uav, 3)
        vel = xp_t.reshape(t_n, n_uav, 3) * v_t[:, None, None]
        acc = xpp_t.reshape(t_n, n_uav, 3) * (v_t**2)[:, None, None] + xp_t.reshape(
            t_n, n_uav, 3
        ) * sdd_t[:, None, None]
        # Endpoints are at rest by construction; pin them exactly.
        vel[0] = 0.0
        vel[-1] = 0.0
        return Trajectory(times=times, pos=pos, vel=vel, acc=acc, dt=dt)

    # The sweeps enforce the limits at the grid points; sampled points
    # between them can still peek over.  Both acceleration terms scale as
    # the square of a uniform speed-profile scale, so shrink the profile
    # by the observed exceedance until all samples are within bounds.
    traj = sample(v)
    for _ in range(6):
        a_ratio = float(np.linalg.norm(traj.acc, axis=2).max()) / limits.a_max
        v_ratio = float(np.linalg.norm(traj.vel, axis=2).max()) / limits.v_max
        g = max(np.sqrt(max(a_ratio, 0.0)), v_ratio)
        if g <= 1.0:
            break
        v = v / (g * 1.0005)
        traj = sample(v)
    return traj


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV schema: t, uav_id, px, py, pz, vx, vy, vz, ax, ay, az."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "uav_id", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az"])
        for k, t in enumerate(traj.times):
            for i in range(traj.n_uavs):
                row = [f"{t:.9g}", str(i)]
                row += [f"{x:.9g}" for x in traj.pos[k, i]]
                row += [f"{x:.9g}" for x in traj.vel[k, i]]
                row += [f"{x:.9g}" for x in traj.acc[k, i]]
                writer.writerow(row)
