"""Fixed jammer rules and the static-equilibrium walkers."""

import numpy as np

from app.agents.base import Agent
from app.game.dynamic_env import Observation
from app.game.models import GridSpec, ScenarioConfig
from app.game.static_game import nash_noiseless
from app.types.general import Action, Player
from app.utils.errors import ContractViolation


def greedy_jammer(y_idx: int, x_idx: int, grid: GridSpec) -> Action:
    """Stay on R if co-located, otherwise close in as far as the step allows without overshooting."""
    gap = x_idx - y_idx
    return int(np.sign(gap)) * min(grid.max_step, abs(gap))


def mixed_jammer(y_idx: int, x_idx: int, grid: GridSpec, rng: np.random.Generator) -> Action:
    """
    Randomized follower. Backward means toward the AP (lower index):
    co-located -> stay or backward, J nearer the AP -> stay or forward,
    R nearer the AP -> backward.
    """
    if x_idx < y_idx:
        return -1
    move = -1 if x_idx == y_idx else 1
    if not 0 <= y_idx + move < grid.n_positions:
        return 0
    return move if rng.random() < 0.5 else 0


def _toward(pos_idx: int, target_idx: int, grid: GridSpec) -> Action:
    gap = target_idx - pos_idx
    return int(np.sign(gap)) * min(grid.max_step, abs(gap))


def _opponent(obs: Observation) -> int:
    if obs.opponent is None:
        raise ContractViolation("scripted jammers need to observe the receiver")
    return obs.opponent


class GreedyJammerAgent(Agent):
    def __init__(self, grid: GridSpec):
        self.grid = grid

    def act(self, obs, legal, t):
        return greedy_jammer(obs.own, _opponent(obs), self.grid)


class MixedJammerAgent(Agent):
    def __init__(self, grid: GridSpec, rng: np.random.Generator):
        self.grid = grid
        self.rng = rng

    def act(self, obs, legal, t):
        return mixed_jammer(obs.own, _opponent(obs), self.grid, self.rng)


class StaticOptimalAgent(Agent):
    """
    Walks toward the static equilibrium. J heads for the grid point nearest
    j* and stays there; R draws L or M with the equilibrium odds once per
    episode and heads there.
    """

    def __init__(
        self,
        role: Player,
        grid: GridSpec,
        cfg: ScenarioConfig,
        rng: np.random.Generator,
        episode_len: int = 1000,
    ):
        self.role = role
        self.grid = grid
        self.rng = rng
        self.episode_len = episode_len
        self.equilibrium = nash_noiseless(cfg.l, cfg.m, cfg.alpha)
        self.target = grid.nearest_index(self.equilibrium.jammer_pos)
        self._episode = -1

    def act(self, obs, legal, t):
        if self.role is Player.RECEIVER and t // self.episode_len != self._episode:
            self._episode = t // self.episode_len
            p_low = self.equilibrium.receiver_strategy.probs[0]
            self.target = 0 if self.rng.random() < p_low else self.grid.n_positions - 1
        return _toward(obs.own, self.target, self.grid)
