"""Least-squares flux planner: system structure, steps and stopping."""
import numpy as np
import pytest

from fluxplan.errors import NotConverged
from fluxplan.flux import flux_quad_boundary
from fluxplan.geometry import LeaderQuad, PointCharge
from fluxplan.ls_planner import (
    LsConfig,
    ls_step,
    plan_ls,
    retention_matrix,
    solve_ls_system,
)
from fluxplan.planning import flux_jacobian

from oracles import forward_diff_jacobian

START = LeaderQuad.from_points((0, 0, 0), (0, 5, 0), (0, 5, 5), (0, 0, 5))
TARGET = PointCharge((40.0, 40.0, 40.0))


def test_flux_jacobian_matches_forward_differences():
    jac = flux_jacobian(START, TARGET)
    oracle = forward_diff_jacobian(
        lambda x: flux_quad_boundary(TARGET, LeaderQuad.from_vector(x)),
        START.to_vector(),
    )
    assert np.allclose(jac, oracle, rtol=1e-4, atol=1e-10)


def test_retention_matrix_structure():
    ata = retention_matrix()
    assert ata.shape == (12, 12)
    assert np.allclose(ata, ata.T)
    # Null space contains rigid translations: equal displacement of all
    # UAVs along any axis costs nothing.
    for axis in range(3):
        t = np.zeros(12)
        t[axis::3] = 1.0
        assert np.allclose(ata @ t, 0.0, atol=1e-12)
    eigs = np.linalg.eigvalsh(ata)
    assert eigs.min() >= -1e-12  # positive semi-definite


def test_solve_ls_system_residual():
    jac = flux_jacobian(START, TARGET)
    alpha, beta, phi_r = 1000.0, 400.0, -1e-3
    dx = solve_ls_system(jac, phi_r, alpha, beta)
    m = np.eye(12) + alpha * np.outer(jac, jac) + beta * retention_matrix()
    assert np.linalg.norm(m @ dx - alpha * jac * phi_r) < 1e-12


def test_step_cap_respected():
    for beta in (0.0, 400.0):
        cfg = LsConfig(alpha=1000.0, beta=beta, step_cap=0.5)
        dx, new_quad = ls_step(START, TARGET, cfg)
        per_uav = np.linalg.norm(dx.reshape(4, 3), axis=1)
        assert per_uav.max() == pytest.approx(0.5, rel=1e-9)
        assert isinstance(new_quad, LeaderQuad)


def test_step_increases_flux_magnitude():
    cfg = LsConfig(alpha=1000.0, beta=0.0, step_cap=0.5)
    _, new_quad = ls_step(START, TARGET, cfg)
    before = flux_quad_boundary(TARGET, START)
    after = flux_quad_boundary(TARGET, new_quad)
    assert after < before < 0.0  # flux grows in magnitude toward the target


def test_plan_ls_converges_centroid_stop():
    path = plan_ls(START, TARGET, LsConfig(alpha=1000.0, beta=400.0, step_cap=8.0))
    assert path.converged
    final = path.final_quad
    assert np.linalg.norm(final.centroid - TARGET.position) <= final.circumradius


def test_plan_ls_converges_flux_stop():
    cfg = LsConfig(alpha=1000.0, beta=0.0, step_cap=3.0, stop_flux_fraction=0.98)
    path = plan_ls(START, TARGET, cfg)
    assert path.converged
    final_flux = flux_quad_boundary(TARGET, path.final_quad)
    assert abs(final_flux) >= 0.98 * 0.5


def test_plan_ls_budget_exhaustion():
    cfg = LsConfig(alpha=1000.0, beta=0.0, step_cap=0.05, max_iters=5)
    with pytest.raises(NotConverged) as exc_info:
        plan_ls(START, TARGET, cfg)
    partial = exc_info.value.path
    assert partial is not None
    assert not partial.converged
    assert len(partial.snapshots) == 6


def test_path_metrics():
    path = plan_ls(START, TARGET, LsConfig(alpha=1000.0, beta=400.0, step_cap=8.0))
    pos = path.positions()
    assert pos.shape == (len(path.snapshots), 4, 3)
    seg = np.linalg.norm(np.diff(pos, axis=0), axis=2)
    assert path.combined_length == pytest.approx(seg.sum())


def test_config_validation():
    with pytest.raises(ValueError):
        LsConfig(alpha=0.0)
    with pytest.raises(ValueError):
        LsConfig(step_cap=-1.0)
    with pytest.raises(ValueError):
        LsConfig(stop_flux_fraction=1.5)
    with pytest.raises(ValueError):
        LsConfig(stop_radius=0.0)
