"""Flux-guided planner: direct flux minimization under side-length constraints.

The problem is

    minimize   Phi(x)                      (cap flux, negative toward target)
    subject to ||p_i - p_{i+1}||^2 = l^2   for the 4 cyclic edges

solved by an equality-constrained SQP with a damped-identity Hessian
model scaled so the tangent step matches the per-iteration step cap, an
l1 merit line search, and a Gauss-Newton feasibility restoration after
every accepted step so that every recorded snapshot is feasible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KktSingular, LineSearchFailed, NotConverged
from .flux import flux_quad_boundary
from .geometry import LeaderQuad, PointCharge
from .planning import PlannedPath, flux_jacobian
from .targets import TargetModel

# Armijo sufficient-decrease parameter for the merit line search.
ARMIJO_C1 = 1e-4
MIN_STEP_FRACTION = 1e-6
KKT_RETRIES = 5
RESTORE_ITERS = 12
# Scale-schedule ramp rate: side-length change per iteration as a
# fraction of the step cap (corner motion per unit dl is dl/sqrt(2)).
RAMP_FRACTION = 0.5


@dataclass(frozen=True)
class ScaleSchedule:
    """Linear ramp of the constrained side length over the first iterations."""

    l_start: float
    l_end: float
    n_iters: int

    def value(self, iteration: int) -> float:
        if iteration >= self.n_iters or self.n_iters == 0:
            return self.l_end
        frac = iteration / self.n_iters
        return self.l_start + frac * (self.l_end - self.l_start)

    def done(self, iteration: int) -> bool:
        return iteration >= self.n_iters


@dataclass
class FgConfig:
    side_length: float = 5.0  # m, constrained edge length l
    max_outer_iters: int = 2000
    step_cap: float = 0.5  # m per UAV per iteration
    constraint_tol: float | None = None  # on ||c||_inf; None = 1e-6 * l^2
    optimality_tol: float = 1e-10
    stop_radius: float | None = None  # m; None = circumradius l/sqrt(2)
    scale_schedule: ScaleSchedule | None = None

    def __post_init__(self):
        if self.side_length <= 0 or self.step_cap <= 0 or self.max_outer_iters <= 0:
            raise ValueError("invalid FgConfig")
        if self.optimality_tol <= 0:
            raise ValueError("optimality_tol must be positive")

    def ctol(self, l: float) -> float:
        return self.constraint_tol if self.constraint_tol is not None else 1e-6 * l * l


@dataclass
class SqpState:
    x: np.ndarray  # 12-vector of leader coordinates
    lagrange_multipliers: np.ndarray  # 4-vector
    merit: float

    def quad(self) -> LeaderQuad:
        return LeaderQuad.from_vector(self.x)


def constraints(quad: LeaderQuad, l: float) -> np.ndarray:
    """c_i = ||edge_i||^2 - l^2 for the 4 cyclic edges."""
    edges = quad.points - np.roll(quad.points, -1, axis=0)
    return np.einsum("ij,ij->i", edges, edges) - l * l


def constraint_jacobian(x: np.ndarray) -> np.ndarray:
    """Analytic 4x12 Jacobian of the squared-edge constraints."""
    pts = x.reshape(4, 3)
    jac = np.zeros((4, 12))
    for i in range(4):
        j = (i + 1) % 4
        d = 2.0 * (pts[i] - pts[j])
        jac[i, 3 * i : 3 * i + 3] = d
        jac[i, 3 * j : 3 * j + 3] = -d
    return jac


def _solve_kkt(h_scale: float, a: np.ndarray, g: np.ndarray, c: np.ndarray):
    """Solve the equality-constrained QP KKT system with damping retries."""
    n, m = 12, a.shape[0]
    damping = 0.0
    for attempt in range(KKT_RETRIES):
        k = np.zeros((n + m, n + m))
        k[:n, :n] = (h_scale + damping) * np.eye(n)
        k[:n, n:] = a.T
        k[n:, :n] = a
        rhs = np.concatenate([-g, -c])
        try:
            sol = np.linalg.solve(k, rhs)
            if np.all(np.isfinite(sol)):
                return sol[:n], sol[n:]
        except np.linalg.LinAlgError:
            pass
        damping = h_scale * 10.0 ** (attempt - 4)
    raise KktSingular("KKT system singular after damping retries")


def _restore_feasibility(x: np.ndarray, l: float, tol: float) -> np.ndarray:
    """Gauss-Newton projection onto the constraint manifold."""
    for _ in range(RESTORE_ITERS):
        c = constraints(LeaderQuad.from_vector(x), l)
        if np.abs(c).max() <= tol:
            break
        a = constraint_jacobian(x)
        gram = a @ a.T
        gram += 1e-12 * np.trace(gram) / 4.0 * np.eye(4)
        x = x - a.T @ np.linalg.solve(gram, c)
    return x


def _clamp_step(p: np.ndarray, step_cap: float) -> np.ndarray:
    per_uav = np.linalg.norm(p.reshape(4, 3), axis=1)
    max_disp = float(per_uav.max())
    if max_disp > step_cap:
        p = p * (step_cap / max_disp)
    return p


def fg_step(state: SqpState, target: PointCharge, cfg: FgConfig, l: float | None = None) -> SqpState:
    """One SQP iteration: QP step, merit line search, feasibility restore."""
    l = cfg.side_length if l is None else l
    ctol = cfg.ctol(l)
    x = state.x
    quad = LeaderQuad.from_vector(x)
    g = flux_jacobian(quad, target)
    c = constraints(quad, l)
    a = constraint_jacobian(x)

    # Least-squares multipliers give the reduced (tangent-space) gradient.
    gram = a @ a.T
    lam_ls = np.linalg.solve(gram + 1e-14 * np.eye(4), -(a @ g))
    g_tan = g + a.T @ lam_ls
    if np.linalg.norm(g_tan) <= cfg.optimality_tol and np.abs(c).max() <= ctol:
        return SqpState(x=x.copy(), lagrange_multipliers=lam_ls, merit=state.merit)

    # The flux gradient decays with distance squared, so scale the
    # identity Hessian model to make the tangent step span the step cap.
    h_scale = max(np.linalg.norm(g_tan) / cfg.step_cap, 1e-300)
    p, lam_qp = _solve_kkt(h_scale, a, g, c)
    p = _clamp_step(p, cfg.step_cap)

    mu = 1.5 * float(np.abs(lam_qp).max()) + 1e-8
    f0 = flux_quad_boundary(target, quad)
    c_l1 = float(np.abs(c).sum())
    merit0 = f0 + mu * c_l1
    descent = float(g @ p) - mu * c_l1

    t = 1.0
    while True:
        x_trial = x + t * p
        quad_trial = LeaderQuad.from_vector(x_trial)
        merit_trial = flux_quad_boundary(target, quad_trial) + mu * float(
            np.abs(constraints(quad_trial, l)).sum()
        )
        if merit_trial <= merit0 + ARMIJO_C1 * t * descent:
            break
        t *= 0.5
        if t < MIN_STEP_FRACTION:
            raise LineSearchFailed(f"merit did not decrease (directional {descent:.3g})")

    x_new = _restore_feasibility(x + t * p, l, ctol)
    quad_new = LeaderQuad.from_vector(x_new)
    merit_new = flux_quad_boundary(target, quad_new) + mu * float(
        np.abs(constraints(quad_new, l)).sum()
    )
    return SqpState(x=x_new, lagrange_multipliers=lam_qp, merit=merit_new)


def default_cluster_schedule(cfg: FgConfig, target: TargetModel) -> ScaleSchedule | None:
    """Ramp the side length so the cap circumscribes the target cloud."""
    if target.effective_radius <= 0.0:
        return None
    l_req = np.sqrt(2.0) * target.effective_radius
    dl_per_iter = RAMP_FRACTION * cfg.step_cap * np.sqrt(2.0)
    n = int(np.ceil(abs(l_req - cfg.side_length) / dl_per_iter))
    return ScaleSchedule(l_start=cfg.side_length, l_end=l_req, n_iters=n)


def plan_fg(start: LeaderQuad, target, cfg: FgConfig | None = None) -> PlannedPath:
    """Run the flux-guided planner until the formation surrounds the target.

    `target` may be a TargetModel or a bare PointCharge.  Cluster targets
    with a nonzero effective radius trigger a scale schedule so the final
    formation circumscribes the cloud.
    """
    cfg = cfg or FgConfig()
    if isinstance(target, TargetModel):
        charge = target.as_point_charge()
        schedule = cfg.scale_schedule or default_cluster_schedule(cfg, target)
    else:
        charge = target
        schedule = cfg.scale_schedule
    if schedule is None:
        schedule = ScaleSchedule(cfg.side_length, cfg.side_length, 0)

    x = _restore_feasibility(start.to_vector(), schedule.value(0), cfg.ctol(schedule.value(0)))
    state = SqpState(x=x, lagrange_multipliers=np.zeros(4), merit=np.inf)
    snapshots = [(0, state.quad())]
    # Stop at the sphere that the fully grown formation circumscribes;
    # driving the cap deeper than that puts targets behind it.
    stop_radius = (
        cfg.stop_radius if cfg.stop_radius is not None else schedule.l_end / np.sqrt(2.0)
    )
    for it in range(1, cfg.max_outer_iters + 1):
        l_k = schedule.value(it)
        quad = state.quad()
        if np.linalg.norm(quad.centroid - charge.position) <= stop_radius:
            if schedule.done(it):
                return PlannedPath(snapshots=snapshots, converged=True)
            # Arrived before the scale ramp finished: inflate in place.
            cen = quad.centroid
            cur_l = float(quad.side_lengths.mean())
            x = (cen + (quad.points - cen) * (l_k / cur_l)).ravel()
            x = _restore_feasibility(x, l_k, cfg.ctol(l_k))
            state = SqpState(
                x=x, lagrange_multipliers=state.lagrange_multipliers, merit=np.inf
            )
        else:
            new_state = fg_step(state, charge, cfg, l=l_k)
            if np.allclose(new_state.x, state.x) and schedule.done(it):
                # Stationary point away from the target: surface it.
                raise NotConverged(
                    "stationary point before reaching the target",
                    path=PlannedPath(snapshots=snapshots, converged=False),
                )
            state = new_state
        snapshots.append((it, state.quad()))
    quad = state.quad()
    stop_radius = cfg.stop_radius if cfg.stop_radius is not None else schedule.l_end / np.sqrt(2.0)
    if np.linalg.norm(quad.centroid - charge.position) <= stop_radius:
        return PlannedPath(snapshots=snapshots, converged=True)
    raise NotConverged(
        f"no convergence in {cfg.max_outer_iters} iterations",
        path=PlannedPath(snapshots=snapshots, converged=False),
    )
