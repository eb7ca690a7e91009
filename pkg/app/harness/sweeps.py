"""Multi-run drivers: the strategic-gain comparison and the scripted-jammer sweep."""

import multiprocessing
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.game.models import ScenarioConfig
from app.harness.experiment import ExperimentConfig, run_experiment
from app.harness.export import export
from app.harness.metrics import late_window_stats
from app.types.general import AgentKind, GameVariant
from app.utils.logger import get_logger

logger = get_logger(__name__)


class GainExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    alphas: tuple[float, ...] = (2.0, 2.25, 2.5, 2.75, 3.0)
    runs: int = Field(10, ge=1)
    n_positions: int = Field(15, ge=2)
    max_step: int = Field(1, ge=1, le=2)
    total_steps: int = Field(1_500_000, ge=1)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)


class GainPoint(BaseModel):
    alpha: float
    strategic_se: float
    random_se: float

    @property
    def ratio(self) -> float:
        return self.strategic_se / self.random_se if self.random_se > 0 else float("inf")


def _late_mean(cfg: ExperimentConfig) -> float:
    return late_window_stats(run_experiment(cfg).rewards)[0]


def _map(configs: list[ExperimentConfig], workers: int) -> list[float]:
    if workers <= 1:
        return [_late_mean(c) for c in configs]
    with multiprocessing.Pool(workers) as pool:
        return pool.map(_late_mean, configs)


def gain_configs(cfg: GainExperimentConfig, alpha: float, agent_r: AgentKind) -> list[ExperimentConfig]:
    scenario = ScenarioConfig.gain(alpha)
    return [
        ExperimentConfig(
            scenario=scenario,
            grid={"n_positions": cfg.n_positions, "max_step": cfg.max_step},
            game=GameVariant.SEQUENTIAL,
            agent_r=agent_r,
            agent_j=AgentKind.TABULAR,
            total_steps=cfg.total_steps,
            seed=cfg.seed + run,
        )
        for run in range(cfg.runs)
    ]


def strategic_gain_experiment(cfg: GainExperimentConfig) -> list[GainPoint]:
    """
    Mean late-window spectral efficiency of a learning receiver and of a
    randomly moving one, both facing a learning jammer, for every alpha.
    """
    points = []
    for alpha in cfg.alphas:
        strategic = _map(gain_configs(cfg, alpha, AgentKind.TABULAR), cfg.workers)
        random = _map(gain_configs(cfg, alpha, AgentKind.RANDOM), cfg.workers)
        point = GainPoint(alpha=alpha, strategic_se=float(np.mean(strategic)), random_se=float(np.mean(random)))
        logger.info(f"alpha={alpha}: strategic {point.strategic_se:.3f}, random {point.random_se:.3f}, ratio {point.ratio:.2f}")
        points.append(point)
    return points


JAMMER_BEHAVIOURS = (AgentKind.DEEP, AgentKind.GREEDY, AgentKind.MIXED)


def jammer_behavior_sweep(
    base: ExperimentConfig,
    seeds: list[int],
    out_dir: Path | None = None,
    workers: int = 1,
) -> dict[tuple[str, int], list[float]]:
    """
    Deep receiver in g2 against a learning, greedy and mixed jammer with
    S = 1 and S = 2. Keys are (jammer kind, max_step).
    """
    configs: dict[tuple[str, int], list[ExperimentConfig]] = {}
    for kind in JAMMER_BEHAVIOURS:
        for max_step in (1, 2):
            configs[(str(kind), max_step)] = [
                base.model_copy(
                    update={
                        "game": GameVariant.SIMULTANEOUS,
                        "agent_r": AgentKind.DEEP,
                        "agent_j": kind,
                        "grid": base.grid.model_copy(update={"max_step": max_step}),
                        "seed": seed,
                    }
                )
                for seed in seeds
            ]
    results = {}
    for key, runs in configs.items():
        if out_dir is None:
            means = _map(runs, workers)
        else:
            means = []
            for run_cfg in runs:
                metrics = run_experiment(run_cfg)
                export(metrics, run_cfg, Path(out_dir) / f"{run_cfg.run_name}-s{key[1]}", ma_window=500)
                means.append(late_window_stats(metrics.rewards)[0])
        results[key] = means
        logger.info(f"{key[0]} jammer, S={key[1]}: late-window means {np.round(means, 4).tolist()}")
    return results
