"""Hemispherical formation construction: frame, followers and shape metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuad, NonPlanarQuad
from .geometry import EPS_GEOM, LeaderQuad

# Followers f1..f4 sit on the formation sphere at depth r/2 behind the cap,
# which fixes their in-plane circle radius at r*sqrt(3)/2.
FOLLOWER_RING_FACTOR = np.sqrt(3.0) / 2.0
# Follower ring sits behind the leader edge midpoints (45 deg off the corners).
PLANARITY_LIMIT = 0.1


@dataclass(frozen=True)
class ShapeMetrics:
    side_lengths: np.ndarray  # 4 cyclic edges (m)
    diagonals: np.ndarray  # p1-p3, p2-p4 (m)
    planarity_defect: float  # max vertex distance to best-fit plane (m)
    area: float  # planar-projected quad area (m^2)


@dataclass(frozen=True)
class HemisphereFormation:
    leaders: LeaderQuad
    followers: np.ndarray  # f1..f5, shape (5, 3)
    radius: float
    normal: np.ndarray

    @property
    def all_positions(self) -> np.ndarray:
        """Leaders then followers, shape (9, 3)."""
        return np.vstack([self.leaders.points, self.followers])


def quad_frame(quad: LeaderQuad):
    """Centroid, unit normal and in-plane orthonormal axes of the quad.

    The normal is oriented so p1->p2->p3->p4 is counter-clockwise when
    seen from the +normal side.
    """
    p1, p2, p3, p4 = quad.points
    n1 = np.cross(p2 - p1, p3 - p1)
    n2 = np.cross(p3 - p1, p4 - p1)
    l1 = np.linalg.norm(n1)
    l2 = np.linalg.norm(n2)
    if l1 <= EPS_GEOM or l2 <= EPS_GEOM:
        raise DegenerateQuad("degenerate triangle in quad")
    normal = n1 / l1 + n2 / l2
    norm = np.linalg.norm(normal)
    if norm <= EPS_GEOM:
        raise DegenerateQuad("opposing triangle normals; quad is folded")
    normal = normal / norm
    centroid = quad.centroid
    e1 = p2 - p1
    e1 = e1 - (e1 @ normal) * normal
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return centroid, normal, (e1, e2)


def shape_metrics(quad: LeaderQuad) -> ShapeMetrics:
    """Side lengths, diagonals, planarity defect and in-plane area."""
    centroid, normal, (e1, e2) = quad_frame(quad)
    rel = quad.points - centroid
    defect = float(np.abs(rel @ normal).max())
    # Shoelace on the in-plane projection.
    u = rel @ e1
    v = rel @ e2
    area = 0.5 * abs(float(np.sum(u * np.roll(v, -1) - v * np.roll(u, -1))))
    return ShapeMetrics(
        side_lengths=quad.side_lengths,
        diagonals=quad.diagonals,
        planarity_defect=defect,
        area=area,
    )


def derive_followers(quad: LeaderQuad) -> HemisphereFormation:
    """Place the 5 follower UAVs on the sphere defined by the leader cap.

    The sphere is centred at the cap centroid with radius r = half the
    mean diagonal.  f1..f4 sit behind the edge midpoints at depth r/2,
    f5 at the pole, all at distance r from the sphere centre.
    """
    metrics = shape_metrics(quad)
    mean_side = float(metrics.side_lengths.mean())
    if metrics.planarity_defect >= PLANARITY_LIMIT * mean_side:
        raise NonPlanarQuad(
            f"planarity defect {metrics.planarity_defect:.3g} m exceeds "
            f"{PLANARITY_LIMIT:.0%} of mean side {mean_side:.3g} m"
        )
    centroid, normal, _ = quad_frame(quad)
    r = float(metrics.diagonals.mean()) / 2.0

    midpoints = 0.5 * (quad.points + np.roll(quad.points, -1, axis=0))
    ring_center = centroid - 0.5 * r * normal
    followers = np.empty((5, 3))
    for i, m in enumerate(midpoints):
        d = m - centroid
        d = d - (d @ normal) * normal
        norm = np.linalg.norm(d)
        if norm <= EPS_GEOM:
            raise DegenerateQuad("edge midpoint coincides with centroid")
        followers[i] = ring_center + (FOLLOWER_RING_FACTOR * r) * (d / norm)
    followers[4] = centroid - r * normal
    return HemisphereFormation(leaders=quad, followers=followers, radius=r, normal=normal)
