"""
Runs one two-player learning experiment on the mobility game.

All randomness comes from a single master seed split into named streams, so
a configuration plus a seed fully determines the reward series and trace.
"""

import time
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.agents.base import Agent, RandomAgent
from app.agents.deep import DeepConfig, DeepQAgent, load_weights
from app.agents.scripted import GreedyJammerAgent, MixedJammerAgent, StaticOptimalAgent
from app.agents.tabular import LearningConfig, TabularQAgent, load_qtable
from app.config import get_settings
from app.game.dynamic_env import legal_actions, observe, payoff_table, reset, step_sequential, step_simultaneous
from app.game.models import GridSpec, ScenarioConfig
from app.harness.metrics import RunMetrics, joint_occupancy, weighted_reward_grid
from app.types.general import JAMMER_ONLY_AGENTS, AgentKind, GameVariant, Player, RewardMode
from app.utils.errors import ConfigError, ContractViolation
from app.utils.general import spawn_generators
from app.utils.logger import get_logger

logger = get_logger(__name__)

STREAMS = ["env", "agent_r", "agent_j", "shadowing"]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig.small)
    grid: GridSpec = Field(default_factory=GridSpec)
    game: GameVariant = GameVariant.SEQUENTIAL
    agent_r: AgentKind = AgentKind.TABULAR
    agent_j: AgentKind = AgentKind.TABULAR
    learning_r: LearningConfig | None = None
    learning_j: LearningConfig | None = None
    deep: DeepConfig = Field(default_factory=DeepConfig)
    total_steps: int = Field(1_500_000, ge=1)
    seed: int = Field(0, ge=0)
    ma_window: int = Field(5_000, ge=1)
    episode_len: int = Field(1_000, ge=1)
    # Q-table (tabular) or .npz weights (deep) to start a player from.
    warm_start_r: Path | None = None
    warm_start_j: Path | None = None

    @model_validator(mode="before")
    @classmethod
    def derive_grid(cls, data: Any):
        # The grid spans the scenario segment unless l and m are given explicitly.
        if not isinstance(data, dict):
            return data
        data = dict(data)
        scenario = data.get("scenario") or ScenarioConfig.small()
        if isinstance(scenario, dict):
            scenario = ScenarioConfig(**scenario)
        data["scenario"] = scenario
        grid = data.get("grid") or {}
        if isinstance(grid, dict):
            data["grid"] = {"l": scenario.l, "m": scenario.m, **grid}
        return data

    @model_validator(mode="after")
    def check_consistency(self):
        if (self.grid.l, self.grid.m) != (self.scenario.l, self.scenario.m):
            raise ValueError(f"grid segment [{self.grid.l}, {self.grid.m}] differs from scenario [{self.scenario.l}, {self.scenario.m}]")
        if self.agent_r in JAMMER_ONLY_AGENTS:
            raise ValueError(f"{self.agent_r} is a jammer policy and cannot play R")
        if self.agent_j in JAMMER_ONLY_AGENTS and self.game is GameVariant.BLIND:
            raise ValueError(f"{self.agent_j} jammer needs to observe R, which g3 does not allow")
        for kind, warm in ((self.agent_r, self.warm_start_r), (self.agent_j, self.warm_start_j)):
            if warm is not None and kind not in (AgentKind.TABULAR, AgentKind.DEEP):
                raise ValueError(f"{kind} agents do not learn and cannot warm start from {warm}")
        for learning in (self.learning_r, self.learning_j):
            if learning is not None and learning.total_steps != self.total_steps:
                raise ValueError(f"learning total_steps {learning.total_steps} != experiment total_steps {self.total_steps}")
        return self

    def learning_for(self, player: Player) -> LearningConfig:
        given = self.learning_r if player is Player.RECEIVER else self.learning_j
        return given or LearningConfig.for_variant(self.game, total_steps=self.total_steps)

    def agent_kind(self, player: Player) -> AgentKind:
        return self.agent_r if player is Player.RECEIVER else self.agent_j

    def warm_start(self, player: Player) -> Path | None:
        return self.warm_start_r if player is Player.RECEIVER else self.warm_start_j

    @property
    def run_name(self) -> str:
        return f"{self.game}-{self.agent_r}-{self.agent_j}-seed{self.seed}"


def build_experiment_config(values: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}") from e


def build_agent(player: Player, cfg: ExperimentConfig, rng: np.random.Generator) -> Agent:
    kind = cfg.agent_kind(player)
    warm = cfg.warm_start(player)
    match kind:
        case AgentKind.TABULAR:
            table = load_qtable(warm, cfg.grid, cfg.game) if warm is not None else None
            return TabularQAgent(cfg.grid, cfg.game, cfg.learning_for(player), rng, table)
        case AgentKind.DEEP:
            observes_opponent = cfg.game is not GameVariant.BLIND
            net = load_weights(warm) if warm is not None else None
            try:
                return DeepQAgent(cfg.grid, observes_opponent, cfg.learning_for(player), cfg.deep, rng, net)
            except ContractViolation as e:
                raise ConfigError(f"Weights in {warm} do not fit {cfg.run_name}: {e}") from e
        case AgentKind.GREEDY:
            return GreedyJammerAgent(cfg.grid)
        case AgentKind.MIXED:
            return MixedJammerAgent(cfg.grid, rng)
        case AgentKind.RANDOM:
            return RandomAgent(rng)
        case AgentKind.STATIC_OPTIMAL:
            return StaticOptimalAgent(player, cfg.grid, cfg.scenario, rng, cfg.episode_len)
    raise ConfigError(f"Unknown agent kind {kind}")


def _run_sequential(cfg, agents, state, rngs, rewards, trace, log_every):
    # Each player's pending decision: [observation, action, reward collected since].
    pending: dict[Player, list | None] = {Player.RECEIVER: None, Player.JAMMER: None}
    for t in range(cfg.total_steps):
        mover = state.turn
        agent = agents[mover]
        obs = observe(state, mover, cfg.game)
        legal = legal_actions(state.index_of(mover), cfg.grid)
        if pending[mover] is not None:
            prev_obs, prev_action, collected = pending[mover]
            agent.learn(prev_obs, prev_action, collected, obs, legal, t)
        action = agent.act(obs, legal, t)
        pending[mover] = [obs, action, 0.0]
        state, reward_r, reward_j = step_sequential(state, action, cfg.grid, cfg.scenario, rngs["shadowing"])
        for player, r in ((Player.RECEIVER, reward_r), (Player.JAMMER, reward_j)):
            if pending[player] is not None:
                pending[player][2] += r
        rewards[t] = reward_r
        trace[t] = (state.x_idx, state.y_idx)
        if log_every and (t + 1) % log_every == 0:
            logger.info(f"{cfg.run_name}: step {t + 1}/{cfg.total_steps}")


def _run_simultaneous(cfg, agents, state, rngs, rewards, trace, log_every):
    players = (Player.RECEIVER, Player.JAMMER)
    for t in range(cfg.total_steps):
        obs = {p: observe(state, p, cfg.game) for p in players}
        legal = {p: legal_actions(state.index_of(p), cfg.grid) for p in players}
        actions = {p: agents[p].act(obs[p], legal[p], t) for p in players}
        state, reward_r, reward_j = step_simultaneous(
            state, actions[Player.RECEIVER], actions[Player.JAMMER], cfg.grid, cfg.scenario, rngs["shadowing"]
        )
        for p, r in ((Player.RECEIVER, reward_r), (Player.JAMMER, reward_j)):
            next_obs = observe(state, p, cfg.game)
            agents[p].learn(obs[p], actions[p], r, next_obs, legal_actions(state.index_of(p), cfg.grid), t)
        rewards[t] = reward_r
        trace[t] = (state.x_idx, state.y_idx)
        if log_every and (t + 1) % log_every == 0:
            logger.info(f"{cfg.run_name}: step {t + 1}/{cfg.total_steps}")


def train(cfg: ExperimentConfig) -> tuple[RunMetrics, dict[Player, Agent]]:
    """Runs the experiment and also hands back the trained agents."""
    rngs = spawn_generators(cfg.seed, STREAMS)
    agents = {
        Player.RECEIVER: build_agent(Player.RECEIVER, cfg, rngs["agent_r"]),
        Player.JAMMER: build_agent(Player.JAMMER, cfg, rngs["agent_j"]),
    }
    state = reset(cfg.grid, cfg.game, rngs["env"])
    rewards = np.zeros(cfg.total_steps)
    trace = np.zeros((cfg.total_steps, 2), dtype=int)
    logger.info(f"Starting {cfg.run_name} for {cfg.total_steps} steps")

    started = time.perf_counter()
    runner = _run_sequential if cfg.game is GameVariant.SEQUENTIAL else _run_simultaneous
    runner(cfg, agents, state, rngs, rewards, trace, get_settings().log_every)
    elapsed = time.perf_counter() - started

    logger.info(f"Finished {cfg.run_name} in {elapsed:.1f}s")
    metrics = RunMetrics(
        rewards=rewards,
        trace=trace,
        occupancy=joint_occupancy(trace, cfg.grid.n_positions),
        value_grid_r=agents[Player.RECEIVER].value_grid(),
        value_grid_j=agents[Player.JAMMER].value_grid(),
        wall_clock_s=elapsed,
    )
    if cfg.scenario.reward is RewardMode.NORMALIZED:
        metrics.weighted_reward = weighted_reward_grid(metrics.occupancy, payoff_table(cfg.grid, cfg.scenario))
    return metrics, agents


def run_experiment(cfg: ExperimentConfig) -> RunMetrics:
    return train(cfg)[0]
