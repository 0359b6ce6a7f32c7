"""Scenario parsing, end-to-end runs and the command-line interface."""
import json

import numpy as np
import pytest

from fluxplan.cli import EXIT_CONFIG, EXIT_OK, compare_report, main
from fluxplan.errors import ScenarioError
from fluxplan.geometry import LeaderQuad
from fluxplan.planning import PlannedPath
from fluxplan.scenario import (
    load_scenario,
    read_path_csv,
    run_scenario,
    write_path_csv,
)

MINIMAL = """
[start]
p1 = [0.0, 0.0, 0.0]
p2 = [0.0, 5.0, 0.0]
p3 = [0.0, 5.0, 5.0]
p4 = [0.0, 0.0, 5.0]

[target]
position = [12.0, 10.0, 10.0]

[planner]
method = "fg"

[planner.fg]
step_cap = 0.7
"""


def write_scenario(tmp_path, text, name="scenario.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_minimal_scenario(tmp_path):
    s = load_scenario(write_scenario(tmp_path, MINIMAL))
    assert s.methods == ["fg"]
    assert np.allclose(s.target.center, [12.0, 10.0, 10.0])
    assert s.fg_cfg.step_cap == 0.7
    assert s.seed is None


def test_load_rejects_missing_tables(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario(tmp_path, "[start]\np1 = [0,0,0]\n"))
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario(tmp_path, MINIMAL.replace("[target]", "[other]")))


def test_load_rejects_ambiguous_target(tmp_path):
    text = MINIMAL.replace(
        "position = [12.0, 10.0, 10.0]",
        "position = [12.0, 10.0, 10.0]\nmembers = [[1.0, 2.0, 3.0]]",
    )
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario(tmp_path, text))


def test_load_rejects_bad_method(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario(tmp_path, MINIMAL.replace('"fg"', '"nope"')))


def test_load_rejects_unknown_planner_key(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(
            write_scenario(tmp_path, MINIMAL + "not_a_real_option = 3.0\n")
        )


def test_distribution_target_is_seeded(tmp_path):
    text = MINIMAL.replace(
        "position = [12.0, 10.0, 10.0]",
        "",
    ).replace(
        "[target]",
        "[target.distribution]\nmean = 50.0\nsigma = 10.0\ncount = 4\nseed = 9",
    )
    s1 = load_scenario(write_scenario(tmp_path, text, "a.toml"))
    s2 = load_scenario(write_scenario(tmp_path, text, "b.toml"))
    assert s1.seed == 9
    assert np.allclose(s1.target.center, s2.target.center)
    assert len(s1.target.members) == 4


def test_path_csv_round_trip(tmp_path):
    quad = LeaderQuad.from_points((0, 0, 0), (0, 5, 0), (0, 5, 5), (0, 0, 5))
    path = PlannedPath(
        snapshots=[(0, quad), (3, quad.translated((1.0, 2.0, 3.0)))],
        converged=True,
    )
    f = tmp_path / "path.csv"
    write_path_csv(path, f)
    loaded = read_path_csv(f)
    assert np.allclose(loaded.positions(), path.positions())
    assert [it for it, _ in loaded.snapshots] == [0, 3]


def test_run_scenario_artifacts(tmp_path):
    scenario = load_scenario(write_scenario(tmp_path, MINIMAL))
    out = tmp_path / "out"
    metrics = run_scenario(scenario, out_dir=out, quiet=True)
    for name in ("path.csv", "trajectory.csv", "sim.csv", "metrics.json"):
        assert (out / name).exists()
    assert metrics["per_method"]["fg"]["converged"]
    assert metrics["per_method"]["fg"]["max_tracking_error_m"] < 2.0
    on_disk = json.loads((out / "metrics.json").read_text())
    assert on_disk["per_method"]["fg"]["iterations"] == metrics["per_method"]["fg"]["iterations"]


def test_cli_run_and_report(tmp_path):
    scenario_file = write_scenario(tmp_path, MINIMAL)
    out = tmp_path / "cli_out"
    assert main(["--quiet", "run", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    report_csv = tmp_path / "report.csv"
    code = main(
        ["report", str(out / "metrics.json"), "--out", str(report_csv)]
    )
    assert code == EXIT_OK
    rows = report_csv.read_text().strip().split("\n")
    assert rows[0].startswith("target_m")
    assert len(rows) == 2


def test_cli_plan_then_simulate(tmp_path):
    scenario_file = write_scenario(tmp_path, MINIMAL)
    plan_out = tmp_path / "plan_out"
    assert main(["--quiet", "plan", "--scenario", str(scenario_file), "--out", str(plan_out)]) == EXIT_OK
    sim_out = tmp_path / "sim_out"
    code = main(
        [
            "--quiet",
            "simulate",
            "--scenario", str(scenario_file),
            "--path", str(plan_out / "path.csv"),
            "--out", str(sim_out),
        ]
    )
    assert code == EXIT_OK
    assert (sim_out / "trajectory.csv").exists()
    assert (sim_out / "sim.csv").exists()


def test_cli_bad_scenario_exit_code(tmp_path):
    missing = tmp_path / "missing.toml"
    assert main(["run", "--scenario", str(missing)]) == EXIT_CONFIG


def test_compare_report_validation(tmp_path):
    with pytest.raises(ScenarioError):
        compare_report([])
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(ScenarioError):
        compare_report([str(bad)])
