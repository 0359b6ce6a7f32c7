"""Geometric primitives: vectors, triangles, meshes and the leader quad."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateQuad, DegenerateTriangle

# Degeneracy threshold for triangle cross products (m^2).
EPS_GEOM = 1e-12
# Minimum clearance between a charge and a surface element (m).
CHARGE_GUARD = 1e-9


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite float64 vector of shape (3,)."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector component: {a}")
    return a


@dataclass(frozen=True)
class Triangle:
    """Oriented triangle; counter-clockwise winding defines the outward normal."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vec3(self.a))
        object.__setattr__(self, "b", as_vec3(self.b))
        object.__setattr__(self, "c", as_vec3(self.c))
        n = np.cross(self.b - self.a, self.c - self.a)
        if np.linalg.norm(n) <= EPS_GEOM:
            raise DegenerateTriangle(f"collinear vertices: {self.a}, {self.b}, {self.c}")

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.b - self.a, self.c - self.a)
        return n / np.linalg.norm(n)

    @property
    def vertices(self) -> np.ndarray:
        return np.stack([self.a, self.b, self.c])


@dataclass(frozen=True)
class PointCharge:
    """Point charge in normalized units (1/(4*pi*eps0) = 1)."""

    position: np.ndarray
    charge: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        if self.charge == 0.0:
            raise ValueError("charge must be nonzero")


@dataclass(frozen=True)
class TriMesh:
    """Ordered collection of consistently wound triangles."""

    triangles: tuple

    def __post_init__(self):
        object.__setattr__(self, "triangles", tuple(self.triangles))
        if not all(isinstance(t, Triangle) for t in self.triangles):
            raise TypeError("TriMesh expects Triangle elements")

    def __len__(self):
        return len(self.triangles)

    @classmethod
    def from_faces(cls, vertices, faces) -> "TriMesh":
        verts = np.asarray(vertices, dtype=float)
        return cls(tuple(Triangle(verts[i], verts[j], verts[k]) for i, j, k in faces))

    def is_closed(self, decimals: int = 9) -> bool:
        """True when every edge is shared by exactly 2 opposite-oriented triangles."""
        edges = {}
        for t in self.triangles:
            vs = [tuple(np.round(v, decimals)) for v in (t.a, t.b, t.c)]
            for u, v in ((vs[0], vs[1]), (vs[1], vs[2]), (vs[2], vs[0])):
                edges[(u, v)] = edges.get((u, v), 0) + 1
        for (u, v), count in edges.items():
            if count != 1 or edges.get((v, u), 0) != 1:
                return False
        return True


@dataclass(frozen=True)
class LeaderQuad:
    """Ordered boundary UAVs p1..p4; cyclic order p1->p2->p3->p4->p1."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (4, 3):
            raise ValueError(f"expected 4x3 points, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite quad coordinates")
        for i in range(4):
            for j in range(i + 1, 4):
                if np.linalg.norm(pts[i] - pts[j]) == 0.0:
                    raise DegenerateQuad(f"coincident vertices p{i + 1}, p{j + 1}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, p1, p2, p3, p4) -> "LeaderQuad":
        return cls(np.stack([as_vec3(p1), as_vec3(p2), as_vec3(p3), as_vec3(p4)]))

    @classmethod
    def from_vector(cls, x) -> "LeaderQuad":
        """Build from the 12-vector layout (p1 xyz, p2 xyz, p3 xyz, p4 xyz)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (12,):
            raise ValueError(f"expected 12-vector, got shape {x.shape}")
        return cls(x.reshape(4, 3))

    def to_vector(self) -> np.ndarray:
        return self.points.reshape(12).copy()

    @property
    def p1(self):
        return self.points[0]

    @property
    def p2(self):
        return self.points[1]

    @property
    def p3(self):
        return self.points[2]

    @property
    def p4(self):
        return self.points[3]

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    @property
    def side_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.points - np.roll(self.points, -1, axis=0), axis=1)

    @property
    def diagonals(self) -> np.ndarray:
        return np.array(
            [
                np.linalg.norm(self.points[0] - self.points[2]),
                np.linalg.norm(self.points[1] - self.points[3]),
            ]
        )

    @property
    def circumradius(self) -> float:
        """Max vertex distance from the centroid."""
        return float(np.linalg.norm(self.points - self.centroid, axis=1).max())

    def translated(self, offset) -> "LeaderQuad":
        return LeaderQuad(self.points + as_vec3(offset))


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis."""
    axis = as_vec3(axis)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
