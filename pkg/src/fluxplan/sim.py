"""Double-integrator particle simulation with per-UAV PID tracking."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import Divergence
from .trajectory import KinematicLimits, Trajectory

DIVERGENCE_BOUND = 10.0  # m


@dataclass(frozen=True)
class ParticleState:
    pos: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pos, dtype=float)
        v = np.asarray(self.vel, dtype=float)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite particle state")
        object.__setattr__(self, "pos", p)
        object.__setattr__(self, "vel", v)


@dataclass(frozen=True)
class PidGains:
    kp: float = 20.0  # 1/s^2
    ki: float = 0.5  # 1/s^3
    kd: float = 9.0  # 1/s
    integral_clamp: float = 2.0

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be nonnegative")
        if self.kp == 0 and self.ki == 0 and self.kd == 0:
            raise ValueError("at least one gain must be positive")


@dataclass
class SimResult:
    """Per-UAV histories (T, n, 3) and aggregate tracking metrics."""

    times: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    control: np.ndarray
    error: np.ndarray
    max_position_error: float
    mean_position_error: float
    max_speed: float
    max_control: float


def step_dynamics(state: ParticleState, u, dt: float) -> ParticleState:
    """Exact discrete double-integrator update (exact for constant u)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float)
    return ParticleState(
        pos=state.pos + dt * state.vel + 0.5 * dt * dt * u,
        vel=state.vel + dt * u,
    )


def pid_control(error, error_integral, error_derivative, gains: PidGains, a_max: float):
    """PID law with per-axis integral clamp and norm-preserving output clamp."""
    e = np.asarray(error, dtype=float)
    ei = np.clip(np.asarray(error_integral, dtype=float), -gains.integral_clamp, gains.integral_clamp)
    ed = np.asarray(error_derivative, dtype=float)
    u = gains.kp * e + gains.ki * ei + gains.kd * ed
    norm = np.linalg.norm(u, axis=-1, keepdims=True)
    scale = np.where(norm > a_max, a_max / np.maximum(norm, 1e-300), 1.0)
    return u * scale


def run_tracking(traj: Trajectory, gains: PidGains | None = None,
                 limits: KinematicLimits | None = None) -> SimResult:
    """Simulate each UAV from the trajectory's initial pose under PID control.

    The derivative term uses reference-velocity feedforward minus the
    actual velocity, and the reference acceleration is fed forward into
    the control before the a_max norm clamp, so the plant remains the
    pure double integrator.
    """
    gains = gains or PidGains()
    limits = limits or KinematicLimits()
    t_n, n_uav, _ = traj.pos.shape
    dt = traj.dt

    pos = np.empty((t_n, n_uav, 3))
    vel = np.empty((t_n, n_uav, 3))
    control = np.zeros((t_n, n_uav, 3))
    error = np.zeros((t_n, n_uav, 3))

    p = traj.pos[0].copy()
    v = np.zeros((n_uav, 3))
    integral = np.zeros((n_uav, 3))
    for k in range(t_n):
        e = traj.pos[k] - p
        err_norm = np.linalg.norm(e, axis=1).max()
        if err_norm > DIVERGENCE_BOUND:
            raise Divergence(f"position error {err_norm:.2f} m at t={traj.times[k]:.2f} s")
        integral = np.clip(integral + e * dt, -gains.integral_clamp, gains.integral_clamp)
        u = gains.kp * e + gains.ki * integral + gains.kd * (traj.vel[k] - v) + traj.acc[k]
        norm = np.linalg.norm(u, axis=-1, keepdims=True)
        u = u * np.where(norm > limits.a_max, limits.a_max / np.maximum(norm, 1e-300), 1.0)
        pos[k] = p
        vel[k] = v
        control[k] = u
        error[k] = e
        if k < t_n - 1:
            step = step_dynamics(ParticleState(p, v), u, dt)
            p, v = step.pos, step.vel

    err_norms = np.linalg.norm(error, axis=2)
    return SimResult(
        times=traj.times.copy(),
        pos=pos,
        vel=vel,
        control=control,
        error=error,
        max_position_error=float(err_norms.max()),
        mean_position_error=float(err_norms.mean()),
        max_speed=float(np.linalg.norm(vel, axis=2).max()),
        max_control=float(np.linalg.norm(control, axis=2).max()),
    )


def write_sim_csv(result: SimResult, path) -> None:
    """Trajectory CSV schema plus err_x/y/z and ux/uy/uz columns."""
    header = [
        "t", "uav_id", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az",
        "err_x", "err_y", "err_z", "ux", "uy", "uz",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        n = result.pos.shape[1]
        for k, t in enumerate(result.times):
            for i in range(n):
                row = [f"{t:.9g}", str(i)]
                row += [f"{x:.9g}" for x in result.pos[k, i]]
                row += [f"{x:.9g}" for x in result.vel[k, i]]
                row += [f"{x:.9g}" for x in result.control[k, i]]
                row += [f"{x:.9g}" for x in result.error[k, i]]
                row += [f"{x:.9g}" for x in result.control[k, i]]
                writer.writerow(row)
