"""Config parsing and the command-line run loop."""

import pytest

from solidbandit.cli import ConfigError, cli_run, configs_from_entries, parse_config
from solidbandit.envs import EnvConfig
from solidbandit.harness import AgentConfig
from solidbandit.solid import SolidConfig


def test_parse_config_skips_comments_and_blanks():
    text = "\n".join(
        [
            "# experiment sweep",
            "",
            "env.kind = toy",
            "  env.xi=0.2  ",
            "run.n = 5000   ",
        ]
    )
    assert parse_config(text) == {"env.kind": "toy", "env.xi": "0.2", "run.n": "5000"}


def test_parse_config_requires_assignments():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("env.kind = toy\nenv.xi")


def test_unknown_keys_are_rejected():
    for key in ("env.noise", "agent.solid.warmup", "run.fast", "gibberish"):
        with pytest.raises(ConfigError, match="unknown config key"):
            configs_from_entries({key: "1"})


def test_bad_values_are_rejected():
    with pytest.raises(ConfigError, match="bad value for env.xi"):
        configs_from_entries({"env.xi": "fast"})
    with pytest.raises(ConfigError):
        configs_from_entries({"env.xi": "0.9"})  # domain error surfaces as config error


def test_empty_entries_give_defaults():
    env_config, agent_config, run_kwargs = configs_from_entries({})
    assert env_config == EnvConfig()
    assert agent_config == AgentConfig()
    assert agent_config.solid is None  # resolved later, per environment
    assert run_kwargs == {}


def test_solid_overrides_layer_on_environment_defaults():
    env_config, agent_config, _ = configs_from_entries(
        {"env.kind": "random", "agent.solid.z0": "2"}
    )
    assert agent_config.solid.z0 == 2.0
    assert agent_config.solid.lambda_init == 50.0  # random-env default survives


def test_theory_steps_parse_as_strings():
    _, agent_config, _ = configs_from_entries(
        {"agent.solid.step_omega": "theory", "agent.solid.step_lambda": "0.25"}
    )
    assert agent_config.solid.step_omega == "theory"
    assert agent_config.solid.step_lambda == 0.25


def test_baseline_parameters_parse():
    _, agent_config, _ = configs_from_entries(
        {"agent.linucb.delta": "0.02", "agent.lints.v_scale": "3"}
    )
    assert agent_config.linucb_delta == 0.02
    assert agent_config.lints_v_scale == 3.0


def test_run_writes_one_csv_per_run_plus_aggregate(tmp_path):
    out = tmp_path / "results"
    code = cli_run(
        ["--algo", "uniform", "--n", "50", "--runs", "3", "--seed", "5", "--out", str(out)]
    )
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "uniform__toy__aggregate.csv",
        "uniform__toy__seed5.csv",
        "uniform__toy__seed6.csv",
        "uniform__toy__seed7.csv",
    ]
    lines = (out / "uniform__toy__seed5.csv").read_text().splitlines()
    assert lines[0] == "step,cum_regret,explored,phase"
    assert len(lines) == 51


def test_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "results"
    argv = ["--algo", "greedy", "--n", "40", "--runs", "2", "--out", str(out)]
    assert cli_run(argv) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert cli_run(argv) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_flags_override_config_values(tmp_path):
    config = tmp_path / "sweep.cfg"
    config.write_text("run.algo = uniform\nrun.n = 500\nrun.seed = 3\n")
    out = tmp_path / "results"
    code = cli_run(["--config", str(config), "--n", "50", "--out", str(out)])
    assert code == 0
    trace = out / "uniform__toy__seed3.csv"
    assert len(trace.read_text().splitlines()) == 51  # --n wins over run.n


def test_config_errors_exit_two(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("env.planet = mars\n")
    assert cli_run(["--config", str(config)]) == 2
    assert "config error" in capsys.readouterr().err

    assert cli_run(["--algo", "uniform", "--n", "2"]) == 2
    assert cli_run(["--algo", "uniform", "--runs", "0"]) == 2


def test_unknown_config_algo_exits_two(tmp_path, capsys):
    config = tmp_path / "bad_algo.cfg"
    config.write_text("run.algo = oam\n")
    assert cli_run(["--config", str(config)]) == 2
    assert "unknown algo" in capsys.readouterr().err


def test_run_errors_exit_one(tmp_path, capsys):
    blocker = tmp_path / "occupied"
    blocker.write_text("not a directory")
    code = cli_run(["--algo", "uniform", "--n", "10", "--out", str(blocker)])
    assert code == 1
    assert "run error" in capsys.readouterr().err


def test_thread_env_var_overrides_parallelism(tmp_path, monkeypatch):
    serial = tmp_path / "serial"
    threaded = tmp_path / "threaded"
    argv = ["--algo", "uniform", "--n", "60", "--runs", "2", "--seed", "1"]
    assert cli_run(argv + ["--out", str(serial)]) == 0
    monkeypatch.setenv("SOLID_BANDIT_THREADS", "2")
    assert cli_run(argv + ["--out", str(threaded), "--parallel", "1"]) == 0
    first = {p.name: p.read_bytes() for p in serial.iterdir()}
    second = {p.name: p.read_bytes() for p in threaded.iterdir()}
    assert first == second


def test_bad_thread_env_var_exits_two(monkeypatch, capsys):
    monkeypatch.setenv("SOLID_BANDIT_THREADS", "many")
    assert cli_run(["--algo", "uniform", "--n", "10"]) == 2
    assert "config error" in capsys.readouterr().err
