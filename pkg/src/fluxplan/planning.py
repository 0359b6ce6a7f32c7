"""Shared planner machinery: planned paths and the flux Jacobian."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flux import flux_quad_boundary
from .geometry import LeaderQuad, PointCharge

FD_STEP = 1e-5  # m, central-difference step for the flux Jacobian


@dataclass
class PlannedPath:
    """Time-ordered sequence of leader-quad snapshots from a planner."""

    snapshots: list  # (iteration_index, LeaderQuad)
    converged: bool = False

    def positions(self) -> np.ndarray:
        """Snapshot positions, shape (n_snapshots, 4, 3)."""
        return np.stack([q.points for _, q in self.snapshots])

    @property
    def combined_length(self) -> float:
        """Sum over UAVs of each UAV's geometric path length (m)."""
        pos = self.positions()
        if len(pos) < 2:
            return 0.0
        steps = np.linalg.norm(np.diff(pos, axis=0), axis=2)
        return float(steps.sum())

    @property
    def final_quad(self) -> LeaderQuad:
        return self.snapshots[-1][1]


def flux_jacobian(quad: LeaderQuad, target: PointCharge, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the cap flux w.r.t. the 12 leader coords.

    Ordering matches LeaderQuad.to_vector: p1 xyz, p2 xyz, p3 xyz, p4 xyz.
    """
    x0 = quad.to_vector()
    jac = np.empty(12)
    for i in range(12):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        fp = flux_quad_boundary(target, LeaderQuad.from_vector(xp))
        fm = flux_quad_boundary(target, LeaderQuad.from_vector(xm))
        jac[i] = (fp - fm) / (2.0 * h)
    return jac
