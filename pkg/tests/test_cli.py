import json

import pytest
from typer.testing import CliRunner

from app.cli import EXIT_CONFIG, EXIT_OK, EXIT_SCENARIO, cli
from app.config import settings
from app.lab.scenarios import BUILTIN_SCENARIOS
from app.lab.verify import IDENTITIES

runner = CliRunner()

SMALL = "scenario=scalar-wz\nreplicates=40\nn_grid=4,8,16\nrefine=2\nstrict=false\nseed=11\n"


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.env"
    path.write_text(SMALL)
    return path


def test_list_names_builtin_scenarios():
    result = runner.invoke(cli, ["list"])
    assert result.exit_code == EXIT_OK
    for name in BUILTIN_SCENARIOS:
        assert name in result.stdout


def test_list_json_includes_configuration():
    result = runner.invoke(cli, ["list", "--json"])
    assert result.exit_code == EXIT_OK
    entries = json.loads(result.stdout)
    assert {e["name"] for e in entries} == set(BUILTIN_SCENARIOS)
    assert all(e["source"] == "builtin" for e in entries)


def test_verify_passes():
    result = runner.invoke(cli, ["verify", "--seeds", "3"])
    assert result.exit_code == EXIT_OK
    assert result.stdout.count("✅") == len(IDENTITIES)


def test_run_requires_exactly_one_source(small_config):
    assert runner.invoke(cli, ["run"]).exit_code == EXIT_CONFIG
    both = runner.invoke(cli, ["run", "--config", str(small_config), "--scenario", "scalar-wz"])
    assert both.exit_code == EXIT_CONFIG


def test_invalid_configuration_exits_with_config_code(tmp_path):
    assert runner.invoke(cli, ["run", "--scenario", "poisson"]).exit_code == EXIT_CONFIG

    bad = tmp_path / "bad.env"
    bad.write_text("scenario=scalar-wz\nn_grid=16,8\n")
    assert runner.invoke(cli, ["run", "--config", str(bad)]).exit_code == EXIT_CONFIG
    assert runner.invoke(cli, ["run", "--config", str(tmp_path / "missing.env")]).exit_code == EXIT_CONFIG


def test_run_from_config_file_writes_outputs(small_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["run", "--config", str(small_config), "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    assert (out / "errors.csv").is_file()
    assert (out / "report.json").is_file()
    assert (out / "tensors.json").is_file()
    assert str(out.resolve()) in result.stdout


def test_seed_override_changes_results(small_config, tmp_path):
    runs = {}
    for seed in ("11", "12"):
        out = tmp_path / seed
        result = runner.invoke(cli, ["run", "--config", str(small_config), "--out", str(out), "--seed", seed])
        assert result.exit_code == EXIT_OK
        runs[seed] = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert runs["11"]["config"]["seed"] == 11
    assert runs["12"]["config"]["seed"] == 12
    assert runs["11"]["levels"][0]["mean_sup_error"] != runs["12"]["levels"][0]["mean_sup_error"]


def test_aborted_run_exits_with_scenario_code(small_config, monkeypatch):
    monkeypatch.setattr(settings, "blowup_threshold", 1.5)
    result = runner.invoke(cli, ["run", "--config", str(small_config)])
    assert result.exit_code == EXIT_SCENARIO


def test_usage_errors_exit_with_config_code():
    assert runner.invoke(cli, ["run", "--scenario", "scalar-wz", "--seed", "abc"]).exit_code == EXIT_CONFIG
    assert runner.invoke(cli, ["verify", "--bogus"]).exit_code == EXIT_CONFIG
    assert runner.invoke(cli, ["simulate"]).exit_code == EXIT_CONFIG
    assert runner.invoke(cli, ["--help"]).exit_code == EXIT_OK
