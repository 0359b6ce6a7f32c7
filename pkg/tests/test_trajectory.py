"""Path filtering and time parameterization under kinematic limits."""
import numpy as np
import pytest

from fluxplan.geometry import LeaderQuad, PointCharge
from fluxplan.fg_planner import FgConfig, plan_fg
from fluxplan.planning import PlannedPath
from fluxplan.trajectory import (
    KinematicLimits,
    Trajectory,
    filter_path,
    parameterize,
    write_trajectory_csv,
)

START = LeaderQuad.from_points((0, 0, 0), (0, 5, 0), (0, 5, 5), (0, 0, 5))


def straight_line(length, n, n_uav=1):
    """(n, n_uav, 3) waypoints along +x."""
    s = np.linspace(0.0, length, n)
    pts = np.zeros((n, n_uav, 3))
    pts[:, :, 0] = s[:, None]
    return pts


def test_filter_drops_close_snapshots():
    quads = [(i, START.translated((0.1 * i, 0.0, 0.0))) for i in range(21)]
    path = PlannedPath(snapshots=quads, converged=True)
    filtered = filter_path(path, min_spacing=0.5)
    # Max per-UAV spacing between kept snapshots is at least min_spacing.
    pos = filtered.positions()
    gaps = np.linalg.norm(np.diff(pos, axis=0), axis=2).max(axis=1)
    assert np.all(gaps[:-1] >= 0.5)
    # Endpoints always survive.
    assert filtered.snapshots[0][0] == 0
    assert filtered.snapshots[-1][0] == 20


def test_filter_validates_spacing():
    path = PlannedPath(snapshots=[(0, START)], converged=True)
    with pytest.raises(ValueError):
        filter_path(path, min_spacing=0.0)


def test_trapezoid_duration_closed_form():
    # 100 m straight line, v=10, a=5: t = d/v + v/a = 12 s.
    traj = parameterize(straight_line(100.0, 40), KinematicLimits(10.0, 5.0))
    assert traj.duration == pytest.approx(12.0, abs=traj.dt)


def test_triangle_duration_closed_form():
    # 5 m straight line never reaches v_max: t = 2*sqrt(d/a) = 2 s.
    traj = parameterize(straight_line(5.0, 30), KinematicLimits(10.0, 5.0))
    assert traj.duration == pytest.approx(2.0, abs=traj.dt)


def test_limits_respected_on_straight_line():
    traj = parameterize(straight_line(60.0, 25), KinematicLimits(10.0, 5.0))
    assert np.linalg.norm(traj.vel, axis=2).max() <= 10.0
    assert np.linalg.norm(traj.acc, axis=2).max() <= 5.0 + 1e-9


def test_endpoints_at_rest():
    traj = parameterize(straight_line(30.0, 15), KinematicLimits())
    assert np.allclose(traj.vel[0], 0.0)
    assert np.allclose(traj.vel[-1], 0.0)
    assert np.allclose(traj.pos[0, 0], [0.0, 0.0, 0.0], atol=1e-9)
    assert np.allclose(traj.pos[-1, 0], [30.0, 0.0, 0.0], atol=1e-6)


def test_limits_respected_on_planned_path():
    path = plan_fg(START, PointCharge((15.0, 15.0, 15.0)), FgConfig(step_cap=0.7))
    limits = KinematicLimits(10.0, 5.0)
    traj = parameterize(filter_path(path), limits)
    assert np.linalg.norm(traj.vel, axis=2).max() <= limits.v_max
    assert np.linalg.norm(traj.acc, axis=2).max() <= limits.a_max + 1e-6
    # Sample positions start/end at the path endpoints.
    assert np.allclose(traj.pos[0], path.positions()[0], atol=1e-9)
    assert np.allclose(traj.pos[-1], path.positions()[-1], atol=1e-6)


def test_stationary_path_degenerates_to_single_sample():
    pts = np.zeros((3, 2, 3))
    traj = parameterize(pts, KinematicLimits())
    assert traj.duration == 0.0
    assert traj.pos.shape == (1, 2, 3)
    assert np.allclose(traj.vel, 0.0)


def test_multi_uav_synchronization():
    # Two UAVs, one with a path twice as long: both finish together and
    # the faster one obeys the shared speed limit.
    pts = np.zeros((20, 2, 3))
    s = np.linspace(0.0, 1.0, 20)
    pts[:, 0, 0] = 40.0 * s
    pts[:, 1, 0] = 80.0 * s
    traj = parameterize(pts, KinematicLimits(10.0, 5.0))
    speeds = np.linalg.norm(traj.vel, axis=2)
    assert speeds.max() <= 10.0
    # UAV 1 dominates the speed cap; UAV 0 moves at half its speed.
    k = len(traj.times) // 2
    assert speeds[k, 0] == pytest.approx(0.5 * speeds[k, 1], rel=1e-6)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        parameterize(straight_line(10.0, 5), KinematicLimits(), dt=0.0)
    with pytest.raises(ValueError):
        parameterize(np.zeros((1, 1, 3)), KinematicLimits())
    with pytest.raises(ValueError):
        parameterize(np.zeros((4, 3)), KinematicLimits())
    with pytest.raises(ValueError):
        KinematicLimits(v_max=0.0)


def test_trajectory_csv_round_trip(tmp_path):
    traj = parameterize(straight_line(20.0, 10, n_uav=2), KinematicLimits())
    out = tmp_path / "trajectory.csv"
    write_trajectory_csv(traj, out)
    rows = out.read_text().strip().split("\n")
    assert rows[0] == "t,uav_id,px,py,pz,vx,vy,vz,ax,ay,az"
    assert len(rows) == 1 + 2 * len(traj.times)
    first = rows[1].split(",")
    assert float(first[0]) == 0.0
    assert first[1] == "0"
