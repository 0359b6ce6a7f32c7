"""Baseline iterative least-squares flux planner with optional shape retention.

Each iteration solves the Tikhonov-regularized system

    (I + alpha J^T J + beta A^T A) dx = alpha J^T phi_r

where J is the flux Jacobian, phi_r the requested flux change, and A a
cyclic-difference operator that penalizes differential UAV motion (the
shape-retention term).  The solved direction is then scaled so the
largest per-UAV displacement equals the step cap; the raw solve produces
displacements far too small to be useful as path increments because the
flux and its Jacobian decay quadratically with distance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotConverged, SingularSystem
from .geometry import LeaderQuad, PointCharge
from .planning import PlannedPath, flux_jacobian

# Flux-change request per step: fraction of the current flux magnitude
# plus a floor so the system never degenerates to a zero right-hand side.
PHI_R_FRACTION = 0.05
PHI_R_FLOOR = 1e-4
# Secondary stop: relative flux change below this over PLATEAU_WINDOW iters.
PLATEAU_RTOL = 1e-6
PLATEAU_WINDOW = 10


@dataclass
class LsConfig:
    alpha: float = 1000.0  # soft flux weight
    beta: float = 0.0  # shape-retention weight
    phi_r: float | None = None  # fixed flux increment; None = adaptive
    max_iters: int = 2000
    step_cap: float = 0.5  # m, per-UAV displacement per iteration
    stop_radius: float | None = None  # m; None = current formation circumradius
    stop_flux_fraction: float | None = None  # stop at |flux| >= frac * |q|/2
    normalize_steps: bool = True  # scale each step up to the cap

    def __post_init__(self):
        if self.alpha <= 0 or self.beta < 0 or self.max_iters <= 0 or self.step_cap <= 0:
            raise ValueError("invalid LsConfig")
        if self.stop_radius is not None and self.stop_radius <= 0:
            raise ValueError("stop_radius must be positive")
        if self.stop_flux_fraction is not None and not 0.0 < self.stop_flux_fraction <= 1.0:
            raise ValueError("stop_flux_fraction must be in (0, 1]")


def retention_matrix() -> np.ndarray:
    """12x12 A^T A for the cyclic per-axis difference operator."""
    rows = []
    for axis in range(3):
        for i in range(4):
            row = np.zeros(12)
            row[3 * i + axis] = 1.0
            row[3 * ((i + 1) % 4) + axis] = -1.0
            rows.append(row)
    a = np.stack(rows)
    return a.T @ a


_ATA = retention_matrix()


def solve_ls_system(jac: np.ndarray, phi_r: float, alpha: float, beta: float) -> np.ndarray:
    """Solve the regularized normal equations for the raw displacement."""
    m = np.eye(12) + alpha * np.outer(jac, jac) + beta * _ATA
    rhs = alpha * jac * phi_r
    try:
        return np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"cond(M) = {np.linalg.cond(m):.3g}") from exc


def _requested_flux_change(flux_now: float, cfg: LsConfig) -> float:
    # Negative: the cap flux is negative when facing the target and the
    # planner drives it further negative (larger magnitude).
    if cfg.phi_r is not None:
        return cfg.phi_r
    return -(PHI_R_FRACTION * abs(flux_now) + PHI_R_FLOOR)


def ls_step(quad: LeaderQuad, target: PointCharge, cfg: LsConfig):
    """One planner iteration; returns (dx, new_quad)."""
    from .flux import flux_quad_boundary

    jac = flux_jacobian(quad, target)
    phi_r = _requested_flux_change(flux_quad_boundary(target, quad), cfg)
    dx = solve_ls_system(jac, phi_r, cfg.alpha, cfg.beta)
    per_uav = np.linalg.norm(dx.reshape(4, 3), axis=1)
    max_disp = float(per_uav.max())
    if max_disp > 0.0:
        if cfg.normalize_steps:
            dx = dx * (cfg.step_cap / max_disp)
        elif max_disp > cfg.step_cap:
            dx = dx * (cfg.step_cap / max_disp)
    return dx, LeaderQuad.from_vector(quad.to_vector() + dx)


def plan_ls(start: LeaderQuad, target: PointCharge, cfg: LsConfig | None = None) -> PlannedPath:
    """Iterate ls_step until the formation surrounds the target.

    Stops when the quad centroid is within the stop radius of the target
    (default: the formation's current circumradius), or — when
    stop_flux_fraction is set — when the cap flux magnitude reaches that
    fraction of its half-enclosure maximum |q|/2.  A flux plateau is a
    secondary stop either way.  Raises NotConverged (carrying the
    partial path) when the iteration budget is exhausted.
    """
    from .flux import flux_quad_boundary

    cfg = cfg or LsConfig()

    def surrounded(quad: LeaderQuad, flux_now: float) -> bool:
        if cfg.stop_flux_fraction is not None:
            return abs(flux_now) >= cfg.stop_flux_fraction * 0.5 * abs(target.charge)
        stop_radius = cfg.stop_radius if cfg.stop_radius is not None else quad.circumradius
        return bool(np.linalg.norm(quad.centroid - target.position) <= stop_radius)

    quad = start
    snapshots = [(0, quad)]
    flux_history = [flux_quad_boundary(target, quad)]
    for it in range(1, cfg.max_iters + 1):
        if surrounded(quad, flux_history[-1]):
            return PlannedPath(snapshots=snapshots, converged=True)
        _, quad = ls_step(quad, target, cfg)
        snapshots.append((it, quad))
        flux_history.append(flux_quad_boundary(target, quad))
        if len(flux_history) > PLATEAU_WINDOW:
            recent = flux_history[-PLATEAU_WINDOW - 1 :]
            scale = max(abs(recent[-1]), 1e-300)
            if max(abs(a - b) for a, b in zip(recent[:-1], recent[1:])) < PLATEAU_RTOL * scale:
                return PlannedPath(snapshots=snapshots, converged=True)
    if surrounded(quad, flux_history[-1]):
        return PlannedPath(snapshots=snapshots, converged=True)
    raise NotConverged(
        f"no convergence in {cfg.max_iters} iterations",
        path=PlannedPath(snapshots=snapshots, converged=False),
    )
