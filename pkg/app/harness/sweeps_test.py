import pytest

from app.harness.experiment import ExperimentConfig
from app.harness.export import read_summary
from app.harness.sweeps import GainExperimentConfig, gain_configs, jammer_behavior_sweep, strategic_gain_experiment
from app.types.general import AgentKind, GameVariant, RewardMode

pytestmark = pytest.mark.order(15)


def test_gain_configs_use_spectral_efficiency():
    cfg = GainExperimentConfig(runs=3, seed=5)
    configs = gain_configs(cfg, 2.5, AgentKind.RANDOM)
    assert [c.seed for c in configs] == [5, 6, 7]
    assert all(c.scenario.reward is RewardMode.SPECTRAL_EFFICIENCY for c in configs)
    assert all(c.game is GameVariant.SEQUENTIAL and c.grid.n_positions == 15 for c in configs)
    assert configs[0].scenario.alpha == 2.5


def test_strategic_gain_experiment_small():
    cfg = GainExperimentConfig(alphas=(2.0, 3.0), runs=1, n_positions=5, total_steps=1_000)
    points = strategic_gain_experiment(cfg)
    assert [p.alpha for p in points] == [2.0, 3.0]
    assert all(p.strategic_se > 0 and p.random_se > 0 for p in points)
    assert points[0].ratio == points[0].strategic_se / points[0].random_se


def test_jammer_behavior_sweep_keys_and_exports(tmp_path):
    base = ExperimentConfig(total_steps=200, grid={"n_positions": 5}, deep={"hidden": "8", "batch": 4, "replay": 50, "sync": 20})
    results = jammer_behavior_sweep(base, [0, 1], out_dir=tmp_path)
    assert set(results) == {(kind, s) for kind in ("deep", "greedy", "mixed") for s in (1, 2)}
    assert all(len(means) == 2 for means in results.values())
    summary = read_summary(tmp_path / "g2-deep-greedy-seed1-s2")
    assert summary.config["grid"]["max_step"] == 2
