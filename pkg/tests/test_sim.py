"""Double-integrator dynamics and PID trajectory tracking."""
import numpy as np
import pytest

from fluxplan.errors import Divergence
from fluxplan.sim import (
    ParticleState,
    PidGains,
    pid_control,
    run_tracking,
    step_dynamics,
    write_sim_csv,
)
from fluxplan.trajectory import KinematicLimits, Trajectory, parameterize


def constant_accel_reference(u, t_end=2.0, dt=0.02):
    """Reference trajectory of a single UAV under constant acceleration."""
    times = np.arange(0.0, t_end + dt / 2, dt)
    u = np.asarray(u, float)
    pos = 0.5 * np.outer(times**2, u)[:, None, :]
    vel = np.outer(times, u)[:, None, :]
    acc = np.broadcast_to(u, (len(times), 1, 3)).copy()
    return Trajectory(times=times, pos=pos, vel=vel, acc=acc, dt=dt)


def test_step_dynamics_exact_integration():
    state = ParticleState(pos=np.array([1.0, 0, 0]), vel=np.array([2.0, 0, 0]))
    u = np.array([3.0, 0.0, 0.0])
    out = state
    for _ in range(100):
        out = step_dynamics(out, u, 0.01)
    # Closed form: p = p0 + v0 t + u t^2 / 2 at t = 1.
    assert out.pos[0] == pytest.approx(1.0 + 2.0 + 1.5, rel=1e-12)
    assert out.vel[0] == pytest.approx(5.0, rel=1e-12)


def test_step_dynamics_validates_dt():
    state = ParticleState(pos=np.zeros(3), vel=np.zeros(3))
    with pytest.raises(ValueError):
        step_dynamics(state, np.zeros(3), 0.0)


def test_pid_control_clamps_norm():
    gains = PidGains(kp=100.0, ki=0.0, kd=0.0)
    u = pid_control(np.array([10.0, 0, 0]), np.zeros(3), np.zeros(3), gains, 5.0)
    assert np.linalg.norm(u) == pytest.approx(5.0)
    small = pid_control(np.array([0.01, 0, 0]), np.zeros(3), np.zeros(3), gains, 5.0)
    assert np.linalg.norm(small) == pytest.approx(1.0)


def test_pid_integral_clamp():
    gains = PidGains(kp=0.0, ki=1.0, kd=0.0, integral_clamp=2.0)
    u = pid_control(np.zeros(3), np.array([50.0, 0, 0]), np.zeros(3), gains, 100.0)
    assert u[0] == pytest.approx(2.0)


def test_gain_validation():
    with pytest.raises(ValueError):
        PidGains(kp=-1.0)
    with pytest.raises(ValueError):
        PidGains(kp=0.0, ki=0.0, kd=0.0)


def test_tracking_constant_acceleration():
    traj = constant_accel_reference([1.0, 0.5, 0.0])
    result = run_tracking(traj, PidGains(), KinematicLimits())
    assert result.max_position_error < 0.1
    assert result.pos.shape == traj.pos.shape


def test_tracking_starts_on_reference():
    traj = constant_accel_reference([0.5, 0.0, 0.0])
    result = run_tracking(traj, PidGains(), KinematicLimits())
    assert np.allclose(result.error[0], 0.0)


def test_control_never_exceeds_limit():
    s = np.linspace(0.0, 50.0, 30)
    pts = np.zeros((30, 1, 3))
    pts[:, 0, 0] = s
    traj = parameterize(pts, KinematicLimits(10.0, 5.0))
    result = run_tracking(traj, PidGains(), KinematicLimits(10.0, 5.0))
    assert result.max_control <= 5.0 + 1e-9
    assert result.max_position_error < 1.0


def test_divergence_detection():
    # An unreachable reference jump must raise instead of silently failing.
    times = np.arange(0.0, 1.0, 0.02)
    pos = np.zeros((len(times), 1, 3))
    pos[len(times) // 2 :, 0, 0] = 100.0
    traj = Trajectory(
        times=times,
        pos=pos,
        vel=np.zeros_like(pos),
        acc=np.zeros_like(pos),
        dt=0.02,
    )
    with pytest.raises(Divergence):
        run_tracking(traj, PidGains(), KinematicLimits())


def test_sim_csv_schema(tmp_path):
    traj = constant_accel_reference([1.0, 0.0, 0.0], t_end=0.2)
    result = run_tracking(traj, PidGains(), KinematicLimits())
    out = tmp_path / "sim.csv"
    write_sim_csv(result, out)
    rows = out.read_text().strip().split("\n")
    header = rows[0].split(",")
    assert header[:2] == ["t", "uav_id"]
    assert header[-6:] == ["err_x", "err_y", "err_z", "ux", "uy", "uz"]
    assert len(rows) == 1 + len(traj.times)
