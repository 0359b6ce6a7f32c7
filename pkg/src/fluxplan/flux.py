"""Signed solid-angle flux through triangulated surfaces for a point charge.

Units are normalized so that a unit charge fully enclosed by a closed
surface produces a flux of exactly 1 (i.e. flux = charge * solid_angle /
(4*pi)).  Flux is negative when the surface normal points toward the
charge.
"""
from __future__ import annotations

import numpy as np

from .errors import ChargeOnSurface, DegenerateQuad, DegenerateTriangle
from .geometry import CHARGE_GUARD, EPS_GEOM, LeaderQuad, PointCharge, Triangle, TriMesh

FOUR_PI = 4.0 * np.pi


def _point_triangle_distance(p, a, b, c) -> float:
    """Euclidean distance from point p to triangle abc (Ericson's method)."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab @ ap
    d2 = ac @ ap
    if d1 <= 0.0 and d2 <= 0.0:
        return float(np.linalg.norm(p - a))
    bp = p - b
    d3 = ab @ bp
    d4 = ac @ bp
    if d3 >= 0.0 and d4 <= d3:
        return float(np.linalg.norm(p - b))
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return float(np.linalg.norm(p - (a + v * ab)))
    cp = p - c
    d5 = ab @ cp
    d6 = ac @ cp
    if d6 >= 0.0 and d5 <= d6:
        return float(np.linalg.norm(p - c))
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return float(np.linalg.norm(p - (a + w * ac)))
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(p - (b + w * (c - b))))
    denom = va + vb + vc
    v = vb / denom
    w = vc / denom
    return float(np.linalg.norm(p - (a + v * ab + w * ac)))


def signed_solid_angle(p, a, b, c) -> float:
    """Signed solid angle of triangle abc seen from p, via Van Oosterom-Strackee.

    Positive when the triangle's counter-clockwise normal points away
    from p.  The atan2 form gives the correct branch for obtuse
    subtended angles.
    """
    v1 = a - p
    v2 = b - p
    v3 = c - p
    l1 = np.linalg.norm(v1)
    l2 = np.linalg.norm(v2)
    l3 = np.linalg.norm(v3)
    numerator = np.cross(v1, v2) @ v3
    denominator = (
        l1 * l2 * l3 + (v1 @ v2) * l3 + (v1 @ v3) * l2 + (v2 @ v3) * l1
    )
    return float(2.0 * np.arctan2(numerator, denominator))


def solid_angle_triangle(charge_pos, tri: Triangle) -> float:
    """Signed solid angle (steradians) subtended by a triangle at charge_pos.

    Raises ChargeOnSurface when the point is within the guard radius of
    the triangle (including its vertices).
    """
    p = np.asarray(charge_pos, dtype=float)
    if _point_triangle_distance(p, tri.a, tri.b, tri.c) <= CHARGE_GUARD:
        raise ChargeOnSurface(f"charge at {p} lies on the triangle within {CHARGE_GUARD}")
    return signed_solid_angle(p, tri.a, tri.b, tri.c)


def flux_surface(charge: PointCharge, mesh: TriMesh) -> float:
    """Flux of a point charge through a triangulated surface."""
    if len(mesh) == 0:
        raise ValueError("mesh is empty")
    total = 0.0
    for idx, tri in enumerate(mesh.triangles):
        try:
            total += solid_angle_triangle(charge.position, tri)
        except ChargeOnSurface as exc:
            raise ChargeOnSurface(f"triangle {idx}: {exc}") from exc
    return charge.charge * total / FOUR_PI


def flux_quad_boundary(charge: PointCharge, quad: LeaderQuad) -> float:
    """Flux through the flat leader cap, split along the p1-p3 diagonal.

    By Gauss's law this equals minus the flux through the curved surface
    closing the formation, so it serves as the planning objective.
    """
    p1, p2, p3, p4 = quad.points
    total = 0.0
    for a, b, c in ((p1, p2, p3), (p1, p3, p4)):
        n = np.cross(b - a, c - a)
        if np.linalg.norm(n) <= EPS_GEOM:
            raise DegenerateQuad("quad triangulation produced a degenerate triangle")
        p = charge.position
        if _point_triangle_distance(p, a, b, c) <= CHARGE_GUARD:
            raise ChargeOnSurface("charge lies on the quad surface")
        total += signed_solid_angle(p, a, b, c)
    return charge.charge * total / FOUR_PI
