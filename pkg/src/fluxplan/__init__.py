"""Flux-based formation path planning, time parameterization and simulation."""

from .errors import (
    ChargeOnSurface,
    DegenerateQuad,
    DegenerateTriangle,
    Divergence,
    EmptyTargetSet,
    FluxplanError,
    InfeasiblePath,
    KktSingular,
    LineSearchFailed,
    NonPlanarQuad,
    NotConverged,
    ScenarioError,
    SingularSystem,
)
from .fg_planner import FgConfig, ScaleSchedule, SqpState, constraints, fg_step, plan_fg
from .flux import flux_quad_boundary, flux_surface, solid_angle_triangle
from .formation import HemisphereFormation, ShapeMetrics, derive_followers, quad_frame, shape_metrics
from .geometry import LeaderQuad, PointCharge, Triangle, TriMesh
from .ls_planner import LsConfig, ls_step, plan_ls
from .planning import PlannedPath, flux_jacobian
from .sim import ParticleState, PidGains, SimResult, pid_control, run_tracking, step_dynamics
from .targets import TargetModel, coc_reduce, exact_multi_flux
from .trajectory import KinematicLimits, Trajectory, filter_path, parameterize

__version__ = "0.1.0"

__all__ = [
    "ChargeOnSurface",
    "DegenerateQuad",
    "DegenerateTriangle",
    "Divergence",
    "EmptyTargetSet",
    "FgConfig",
    "FluxplanError",
    "HemisphereFormation",
    "InfeasiblePath",
    "KinematicLimits",
    "KktSingular",
    "LeaderQuad",
    "LineSearchFailed",
    "LsConfig",
    "NonPlanarQuad",
    "NotConverged",
    "ParticleState",
    "PidGains",
    "PlannedPath",
    "PointCharge",
    "ScaleSchedule",
    "ScenarioError",
    "ShapeMetrics",
    "SimResult",
    "SingularSystem",
    "SqpState",
    "TargetModel",
    "Trajectory",
    "Triangle",
    "TriMesh",
    "coc_reduce",
    "constraints",
    "derive_followers",
    "exact_multi_flux",
    "fg_step",
    "filter_path",
    "flux_jacobian",
    "flux_quad_boundary",
    "flux_surface",
    "ls_step",
    "parameterize",
    "pid_control",
    "plan_fg",
    "plan_ls",
    "quad_frame",
    "run_tracking",
    "shape_metrics",
    "solid_angle_triangle",
    "step_dynamics",
]
