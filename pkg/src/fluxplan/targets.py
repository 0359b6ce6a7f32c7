"""Target modelling: single charges and clusters reduced to a centre of charge."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTargetSet
from .flux import flux_quad_boundary
from .geometry import LeaderQuad, PointCharge, as_vec3


@dataclass(frozen=True)
class TargetModel:
    """Single target or a cluster reduced to centre-of-charge + radius."""

    kind: str  # "single" | "cluster"
    center: np.ndarray
    charge: float = 1.0
    effective_radius: float = 0.0
    members: tuple = ()

    def __post_init__(self):
        if self.kind not in ("single", "cluster"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "center", as_vec3(self.center))
        object.__setattr__(self, "members", tuple(as_vec3(m) for m in self.members))

    @classmethod
    def single(cls, position, charge: float = 1.0) -> "TargetModel":
        return cls(kind="single", center=position, charge=charge)

    def as_point_charge(self) -> PointCharge:
        return PointCharge(position=self.center, charge=self.charge)


def coc_reduce(members) -> TargetModel:
    """Reduce a discrete target set to its centre of charge.

    The centre is the arithmetic mean of the member positions and the
    effective radius is the largest member distance from the centre.
    Total charge is normalized to 1.
    """
    members = [as_vec3(m) for m in members]
    if not members:
        raise EmptyTargetSet("no target members")
    pts = np.stack(members)
    center = pts.mean(axis=0)
    radius = float(np.linalg.norm(pts - center, axis=1).max())
    return TargetModel(
        kind="cluster",
        center=center,
        charge=1.0,
        effective_radius=radius,
        members=tuple(members),
    )


def exact_multi_flux(members, quad: LeaderQuad) -> float:
    """Cap flux from per-member unit charges, total charge normalized to 1."""
    members = [as_vec3(m) for m in members]
    if not members:
        raise EmptyTargetSet("no target members")
    w = 1.0 / len(members)
    return sum(flux_quad_boundary(PointCharge(m, w), quad) for m in members)
