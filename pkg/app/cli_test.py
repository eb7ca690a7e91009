import json

import pandas as pd
import pytest

from app.cli import EXIT_CONFIG, EXIT_RUNTIME, build_parser, experiment_from_args, main
from app.harness.export import read_summary
from app.types.general import AgentKind, GameVariant

pytestmark = pytest.mark.order(14)


def test_static_solve_json(capsys):
    assert main(["static-solve", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows["jammer_pos"] == pytest.approx(50 / 3)
    assert rows["receiver_x0"] == 10.0
    assert rows["receiver_x1"] == 50.0
    assert rows["jammer_asymptote"] == pytest.approx(20.0)


def test_static_solve_receiver_leads(capsys):
    assert main(["static-solve", "--leader", "R", "--pure-leader", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows["receiver_p0"] == 1.0


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text('game = "g2"\nsteps = 500\n\n[scenario]\nalpha = 3.0\n\n[grid]\nn_positions = 5\n\n[learning_r]\nlearning_rate = 0.2\n')
    args = build_parser().parse_args(["simulate", "--config", str(config), "--n-positions", "7", "--seed", "3"])
    cfg = experiment_from_args(args)
    assert cfg.game is GameVariant.SIMULTANEOUS
    assert cfg.scenario.alpha == 3.0
    assert cfg.grid.n_positions == 7
    assert cfg.total_steps == 500
    assert cfg.learning_r.total_steps == 500
    assert cfg.learning_r.learning_rate == 0.2
    assert cfg.agent_j is AgentKind.TABULAR


def test_train_deep_defaults():
    args = build_parser().parse_args(["train-deep", "--game", "g3", "--hidden", "8,4", "--steps", "100"])
    cfg = experiment_from_args(args)
    assert cfg.agent_r is AgentKind.DEEP and cfg.agent_j is AgentKind.DEEP
    assert cfg.deep.hidden == (8, 4)


def test_simulate_exports_run(tmp_path):
    argv = ["simulate", "--game", "g3", "--steps", "1000", "--n-positions", "5", "--ma-window", "50", "--out", str(tmp_path)]
    assert main(argv) == 0
    run_dir = tmp_path / "g3-tabular-tabular-seed0"
    assert read_summary(run_dir).total_steps == 1000
    assert (run_dir / "qtable_R.txt").exists()
    assert (run_dir / "qtable_J.txt").exists()


def test_simulate_saves_and_warm_starts_tables(tmp_path, capsys):
    base = ["simulate", "--game", "g3", "--steps", "500", "--n-positions", "5", "--out", str(tmp_path / "runs")]
    assert main([*base, "--save-qtable", str(tmp_path / "tables")]) == 0
    assert (tmp_path / "tables" / "qtable_R.txt").exists()
    assert not (tmp_path / "runs" / "g3-tabular-tabular-seed0" / "qtable_R.txt").exists()
    warm = ["--load-qtable-r", str(tmp_path / "tables" / "qtable_R.txt"), "--load-qtable-j", str(tmp_path / "tables" / "qtable_J.txt")]
    args = build_parser().parse_args([*base, *warm])
    assert experiment_from_args(args).warm_start_r == tmp_path / "tables" / "qtable_R.txt"
    assert main([*base, "--seed", "1", *warm]) == 0
    assert main([*base, "--n-positions", "7", *warm]) == EXIT_CONFIG


def test_show_prints_exported_summary(tmp_path, capsys):
    assert main(["simulate", "--game", "g3", "--steps", "300", "--n-positions", "5", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["show", str(tmp_path / "g3-tabular-tabular-seed0"), "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows["total_steps"] == 300
    assert "rewards.csv" in rows["files"]


def test_static_solve_writes_curves(tmp_path, capsys):
    path = tmp_path / "curves.csv"
    assert main(["static-solve", "--json", "--curves", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["curves"] == str(path)
    assert pd.read_csv(path)["equilibrium"].iloc[-1] == pytest.approx(4 / 9)


def test_oracle_g1_writes_tables(tmp_path):
    argv = ["oracle", "--game", "g1", "--n-positions", "5", "--max-step", "1", "--gamma", "0.5", "--out", str(tmp_path)]
    assert main(argv) == 0
    values = pd.read_csv(tmp_path / "oracle-g1" / "value_r_moves.csv", index_col="x_idx")
    assert values.shape == (5, 5)


def test_oracle_static(capsys):
    assert main(["oracle", "--game", "static", "--n-points", "41"]) == 0
    assert "Static oracle" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--agent-r", "greedy", "--steps", "10"],
        ["simulate", "--l", "60", "--steps", "10"],
        ["oracle", "--game", "g1", "--gamma", "1.0", "--n-positions", "3"],
        ["oracle", "--game", "g2", "--tol", "0", "--n-positions", "3"],
        ["simulate", "--load-qtable-r", "missing.txt", "--steps", "10"],
        ["simulate", "--config", "missing.toml"],
    ],
)
def test_config_errors_exit_2(argv):
    assert main(argv) == EXIT_CONFIG


def test_unwritable_output_exits_1(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    argv = ["oracle", "--game", "g1", "--n-positions", "3", "--gamma", "0.5", "--out", str(blocker)]
    assert main(argv) == EXIT_RUNTIME
